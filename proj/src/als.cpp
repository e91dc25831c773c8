#include "cpd/als.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "cpd/error.hpp"
#include "cpd/linalg.hpp"
#include "cpd/loss.hpp"

namespace cpd {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::vector<Matrix> as_columns(const std::vector<Vector>& vs) {
  std::vector<Matrix> out;
  out.reserve(vs.size());
  for (const auto& v : vs) out.emplace_back(v);
  return out;
}

Vector rank_one_update(const DenseTensor& y, const std::vector<Vector>& a, std::size_t k) {
  std::vector<std::size_t> modes;
  std::vector<Vector> ws;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i == k) continue;
    modes.push_back(i);
    ws.push_back(a[i]);
  }
  const DenseTensor b = contract_vectors(y, modes, ws);
  return Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size()));
}

void record(RunReport& rep, const AlsOptions& opts, const DenseTensor& y, std::span<const Matrix> factors,
            const Vector& weights, const CpModel* truth) {
  if (!opts.record_trace) return;
  rep.residual_trace.push_back(frobenius_norm(y - cp_reconstruct(factors, weights)));
  if (truth) rep.loss_trace.push_back(loss_matched(factors, truth->factors));
}

}  // namespace

std::optional<int> RunReport::iterations_to(double threshold) const {
  for (std::size_t t = 0; t < loss_trace.size(); ++t) {
    if (loss_trace[t] < threshold) return static_cast<int>(t);
  }
  return std::nullopt;
}

double max_column_change(std::span<const Matrix> before, std::span<const Matrix> after) {
  double worst = 0.0;
  for (std::size_t k = 0; k < before.size(); ++k) {
    for (Eigen::Index r = 0; r < before[k].cols(); ++r) {
      worst = std::max(worst, sign_distance(before[k].col(r), after[k].col(r)));
    }
  }
  return worst;
}

std::vector<Vector> r1_init(const DenseTensor& y) {
  if (y.order() < 2) throw InvalidArgument("r1_init: tensor order must be at least 2");
  if (!y.all_finite()) throw InvalidArgument("r1_init: non-finite values");
  if (frobenius_norm(y) == 0.0) throw NumericalError("r1_init: degenerate all-zero tensor");
  std::vector<Vector> a;
  for (std::size_t k = 0; k < y.order(); ++k) a.emplace_back(svd_r(unfold(y, k), 1).col(0));
  return a;
}

AlsResult r1_als(const DenseTensor& y, const AlsOptions& opts, const std::optional<std::vector<Vector>>& init,
                 const CpModel* truth) {
  const auto start = Clock::now();
  if (opts.max_iters < 1 || opts.tol < 0.0) throw InvalidArgument("r1_als: invalid options");
  if (y.order() < 2) throw InvalidArgument("r1_als: tensor order must be at least 2");
  const double ynorm = frobenius_norm(y);
  if (ynorm == 0.0) throw NumericalError("r1_als: zero-norm update (input tensor is zero)");

  std::vector<Vector> a;
  if (init) {
    a = *init;
    if (a.size() != y.order()) throw InvalidArgument("r1_als: one initial vector per mode required");
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (static_cast<std::size_t>(a[k].size()) != y.dim(k)) throw InvalidArgument("r1_als: initial vector length mismatch");
      const double n = a[k].norm();
      if (n == 0.0) throw InvalidArgument("r1_als: zero initial vector");
      a[k] /= n;
    }
  } else {
    a = r1_init(y);
  }

  AlsResult res;
  res.report.method = "r1-als";
  {
    const auto cols = as_columns(a);
    record(res.report, opts, y, cols, fit_weights(y, cols), truth);
  }

  for (int it = 0; it < opts.max_iters; ++it) {
    const auto before = as_columns(a);
    double last_norm = 0.0;
    for (std::size_t k = 0; k < y.order(); ++k) {
      Vector b = rank_one_update(y, a, k);
      last_norm = b.norm();
      if (!(last_norm > kZeroNormTol * ynorm)) {
        throw NumericalError("r1_als: zero-norm update at mode " + std::to_string(k));
      }
      a[k] = b / last_norm;
    }
    const auto after = as_columns(a);
    res.report.iterations = it + 1;
    record(res.report, opts, y, after, Vector::Constant(1, last_norm), truth);
    if (max_column_change(before, after) <= opts.tol) {
      res.report.converged = true;
      break;
    }
  }

  // Final mode-1 update gives |lambda| and the signal estimate.
  Vector b1 = rank_one_update(y, a, 0);
  const double lambda = b1.norm();
  if (!(lambda > kZeroNormTol * ynorm)) throw NumericalError("r1_als: zero-norm update at mode 0");
  a[0] = b1 / lambda;
  res.model.lambdas = Vector::Constant(1, lambda);
  res.model.factors = as_columns(a);
  res.signal = cp_reconstruct(res.model);
  res.report.wall_ms = elapsed_ms(start);
  return res;
}

Matrix als_update_mode(const DenseTensor& y, std::span<const Matrix> factors, std::size_t k) {
  if (factors.size() != y.order()) throw InvalidArgument("als_update_mode: one factor per mode required");
  if (k >= y.order()) throw InvalidArgument("als_update_mode: mode out of range");
  const auto R = factors.front().cols();
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (factors[i].cols() != R) throw InvalidArgument("als_update_mode: factors differ in rank");
    if (static_cast<std::size_t>(factors[i].rows()) != y.dim(i)) {
      throw InvalidArgument("als_update_mode: factor " + std::to_string(i) + " has wrong row count");
    }
  }
  if (y.order() == 1) throw InvalidArgument("als_update_mode: order-1 tensor has no other modes");

  const Matrix kr = khatri_rao_descending(factors, k);
  const Matrix yk = unfold(y, k);
  const Matrix g = kr.transpose() * kr;

  Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
  const double emax = es.eigenvalues().maxCoeff();
  const double emin = es.eigenvalues().minCoeff();
  if (emax > 0.0 && emin > emax * kDefaultRcond) {
    const Matrix rhs = (yk * kr).transpose();
    return Eigen::LDLT<Matrix>(g).solve(rhs).transpose();
  }
  if (numerical_rank(kr) < R) {
    throw NumericalError("als_update_mode: rank-deficient Khatri-Rao system at mode " + std::to_string(k) +
                         " (collinear components)");
  }
  return yk * pinv(kr.transpose());
}

std::pair<Vector, DenseTensor> estimate_lambda_signal(const DenseTensor& y, std::span<const Matrix> factors,
                                                      const Matrix& b1) {
  if (factors.size() != y.order() || b1.rows() != factors[0].rows() || b1.cols() != factors[0].cols()) {
    throw InvalidArgument("estimate_lambda_signal: shape mismatch");
  }
  std::vector<Matrix> f(factors.begin(), factors.end());
  f[0] = b1;
  Vector lambdas = b1.colwise().norm().transpose();
  return {lambdas, cp_reconstruct(f, Vector::Ones(b1.cols()))};
}

AlsResult als(const DenseTensor& y, std::vector<Matrix> a, const AlsOptions& opts, const CpModel* truth) {
  const auto start = Clock::now();
  if (opts.max_iters < 1 || opts.tol < 0.0) throw InvalidArgument("als: invalid options");
  if (a.size() != y.order()) throw InvalidArgument("als: one initial factor per mode required");
  if (y.order() < 2) throw InvalidArgument("als: tensor order must be at least 2");
  const auto R = a.front().cols();
  if (R < 1) throw InvalidArgument("als: rank must be at least 1");
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].cols() != R || static_cast<std::size_t>(a[k].rows()) != y.dim(k)) {
      throw InvalidArgument("als: initial factor " + std::to_string(k) + " has wrong shape");
    }
    const Vector norms = normalize_columns(a[k]);
    if ((norms.array() == 0.0).any()) throw InvalidArgument("als: zero column in initial factor");
  }
  if (!y.all_finite()) throw InvalidArgument("als: non-finite values");
  const double ynorm = frobenius_norm(y);
  if (ynorm == 0.0) throw NumericalError("als: zero-norm update (input tensor is zero)");

  AlsResult res;
  res.report.method = "als";
  if (opts.record_trace) record(res.report, opts, y, a, fit_weights(y, a), truth);

  for (int it = 0; it < opts.max_iters; ++it) {
    const std::vector<Matrix> before = a;
    Vector last_norms;
    for (std::size_t k = 0; k < y.order(); ++k) {
      Matrix b = als_update_mode(y, a, k);
      last_norms = normalize_columns(b);
      if ((last_norms.array() <= kZeroNormTol * ynorm).any()) {
        throw NumericalError("als: zero-norm update column at mode " + std::to_string(k));
      }
      a[k] = std::move(b);
    }
    res.report.iterations = it + 1;
    record(res.report, opts, y, a, last_norms, truth);
    if (max_column_change(before, a) <= opts.tol) {
      res.report.converged = true;
      break;
    }
  }

  const Matrix b1 = als_update_mode(y, a, 0);
  auto [lambdas, signal] = estimate_lambda_signal(y, a, b1);
  if ((lambdas.array() <= kZeroNormTol * ynorm).any()) throw NumericalError("als: zero-norm update column at mode 0");
  a[0] = b1;
  normalize_columns(a[0]);
  res.model.lambdas = std::move(lambdas);
  res.model.factors = std::move(a);
  res.signal = std::move(signal);
  res.report.wall_ms = elapsed_ms(start);
  return res;
}

}  // namespace cpd
