#include "cpd/cp_model.hpp"

#include <cmath>
#include <string>

#include "cpd/error.hpp"
#include "cpd/linalg.hpp"

namespace cpd {

Dims CpModel::dims() const {
  Dims d;
  for (const auto& a : factors) d.push_back(static_cast<std::size_t>(a.rows()));
  return d;
}

void CpModel::validate(double tol) const {
  if (lambdas.size() < 1) throw InvalidArgument("CP model must have rank >= 1");
  if (factors.empty()) throw InvalidArgument("CP model has no factors");
  for (std::size_t k = 0; k < factors.size(); ++k) {
    const auto& a = factors[k];
    if (a.cols() != lambdas.size()) {
      throw InvalidArgument("factor " + std::to_string(k) + " has " + std::to_string(a.cols()) +
                            " columns, expected " + std::to_string(lambdas.size()));
    }
    if (a.rows() < 1) throw InvalidArgument("factor " + std::to_string(k) + " is empty");
    for (Eigen::Index r = 0; r < a.cols(); ++r) {
      if (std::abs(a.col(r).norm() - 1.0) > tol) {
        throw InvalidArgument("factor " + std::to_string(k) + " column " + std::to_string(r) +
                              " is not unit norm");
      }
    }
  }
}

Vector normalize_columns(Matrix& m) {
  Vector norms = m.colwise().norm().transpose();
  for (Eigen::Index r = 0; r < m.cols(); ++r) {
    if (norms(r) > 0.0) m.col(r) /= norms(r);
  }
  return norms;
}

DenseTensor cp_reconstruct(std::span<const Matrix> factors, const Vector& weights) {
  if (factors.empty()) throw InvalidArgument("cp_reconstruct: no factors");
  for (const auto& a : factors) {
    if (a.cols() != weights.size()) throw InvalidArgument("cp_reconstruct: rank mismatch");
  }
  Dims dims;
  for (const auto& a : factors) dims.push_back(static_cast<std::size_t>(a.rows()));
  if (factors.size() == 1) {
    Matrix m = (factors[0] * weights).transpose();
    return DenseTensor(dims, std::vector<double>(m.data(), m.data() + m.size()));
  }
  const Matrix kr = khatri_rao_descending(factors, 0);
  return fold(factors[0] * weights.asDiagonal() * kr.transpose(), 0, dims);
}

DenseTensor cp_reconstruct(const CpModel& m) { return cp_reconstruct(m.factors, m.lambdas); }

Vector project_rank_one(const DenseTensor& y, std::span<const Matrix> factors) {
  if (factors.size() != y.order()) throw InvalidArgument("project_rank_one: order mismatch");
  const auto R = factors.front().cols();
  if (factors.size() == 1) return factors[0].transpose() * Eigen::Map<const Vector>(y.data(), static_cast<Eigen::Index>(y.size()));
  const Matrix mttkrp = unfold(y, 0) * khatri_rao_descending(factors, 0);
  Vector out(R);
  for (Eigen::Index r = 0; r < R; ++r) out(r) = factors[0].col(r).dot(mttkrp.col(r));
  return out;
}

Vector fit_weights(const DenseTensor& y, std::span<const Matrix> factors) {
  const Matrix g = hadamard_gram(factors, factors.size());
  return lstsq(g, project_rank_one(y, factors));
}

}  // namespace cpd
