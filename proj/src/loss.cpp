#include "cpd/loss.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "cpd/error.hpp"

namespace cpd {

namespace {

void check_pair(std::span<const Matrix> est, std::span<const Matrix> truth) {
  if (est.size() != truth.size() || est.empty()) throw InvalidArgument("loss: order mismatch");
  for (std::size_t k = 0; k < est.size(); ++k) {
    if (est[k].rows() != truth[k].rows()) throw InvalidArgument("loss: dimension mismatch");
  }
}

// cost(i, j): worst mode distance between estimated component i and true component j.
Matrix component_costs(std::span<const Matrix> est, std::span<const Matrix> truth) {
  const auto re = est.front().cols();
  const auto rt = truth.front().cols();
  Matrix cost = Matrix::Zero(re, rt);
  for (std::size_t k = 0; k < est.size(); ++k) {
    for (Eigen::Index i = 0; i < re; ++i) {
      for (Eigen::Index j = 0; j < rt; ++j) {
        cost(i, j) = std::max(cost(i, j), sign_distance(est[k].col(i), truth[k].col(j)));
      }
    }
  }
  return cost;
}

void best_assignment(const Matrix& cost, Eigen::Index i, std::vector<bool>& used, double acc,
                     double& best) {
  if (acc >= best) return;
  if (i == cost.rows()) {
    best = acc;
    return;
  }
  for (Eigen::Index j = 0; j < cost.cols(); ++j) {
    if (used[static_cast<std::size_t>(j)]) continue;
    used[static_cast<std::size_t>(j)] = true;
    best_assignment(cost, i + 1, used, std::max(acc, cost(i, j)), best);
    used[static_cast<std::size_t>(j)] = false;
  }
}

}  // namespace

double sign_distance(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  return std::min((a - b).norm(), (a + b).norm());
}

double loss_general(std::span<const Matrix> est, std::span<const Matrix> truth) {
  check_pair(est, truth);
  double worst = 0.0;
  for (std::size_t k = 0; k < est.size(); ++k) {
    if (est[k].cols() != truth[k].cols()) throw InvalidArgument("loss_general: rank mismatch");
    for (Eigen::Index r = 0; r < est[k].cols(); ++r) {
      worst = std::max(worst, sign_distance(est[k].col(r), truth[k].col(r)));
    }
  }
  return worst;
}

double loss_general(const CpModel& est, const CpModel& truth) {
  return loss_general(est.factors, truth.factors);
}

Vector loss_unmatched(const Matrix& est, const Matrix& truth) {
  if (est.rows() != truth.rows()) throw InvalidArgument("loss_unmatched: row count mismatch");
  if (truth.cols() == 0) throw InvalidArgument("loss_unmatched: empty truth");
  Vector out(est.cols());
  for (Eigen::Index r = 0; r < est.cols(); ++r) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < truth.cols(); ++j) best = std::min(best, sign_distance(est.col(r), truth.col(j)));
    out(r) = best;
  }
  return out;
}

double loss_matched(std::span<const Matrix> est, std::span<const Matrix> truth) {
  check_pair(est, truth);
  const Matrix cost = component_costs(est, truth);
  if (cost.rows() > cost.cols()) throw InvalidArgument("loss_matched: more estimated than true components");
  if (cost.cols() <= 8) {
    std::vector<bool> used(static_cast<std::size_t>(cost.cols()), false);
    double best = std::numeric_limits<double>::infinity();
    best_assignment(cost, 0, used, 0.0, best);
    return best;
  }
  // Greedy: repeatedly take the cheapest remaining pair.
  Matrix c = cost;
  double worst = 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  for (Eigen::Index n = 0; n < cost.rows(); ++n) {
    Eigen::Index i = 0;
    Eigen::Index j = 0;
    const double v = c.minCoeff(&i, &j);
    worst = std::max(worst, v);
    c.row(i).setConstant(inf);
    c.col(j).setConstant(inf);
  }
  return worst;
}

double loss_matched(const CpModel& est, const CpModel& truth) {
  return loss_matched(est.factors, truth.factors);
}

}  // namespace cpd
