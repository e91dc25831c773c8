#pragma once

#include <vector>

#include "cpd/tensor.hpp"

namespace cpd {

/// X = sum_r lambda_r a_{1,r} o ... o a_{d,r}. Loading columns have unit norm.
/// Estimated models store |lambda_r| since signs are not identifiable.
struct CpModel {
  Vector lambdas;
  std::vector<Matrix> factors;

  std::size_t rank() const { return static_cast<std::size_t>(lambdas.size()); }
  std::size_t order() const { return factors.size(); }
  Dims dims() const;

  /// Throws InvalidArgument when shapes disagree or a column is not unit norm
  /// within `tol`.
  void validate(double tol = 1e-10) const;
};

/// Scales each column to unit norm; returns the original norms.
Vector normalize_columns(Matrix& m);

DenseTensor cp_reconstruct(const CpModel& m);

/// sum_r w_r * (columns r of every factor), where the factors need not be
/// normalized.
DenseTensor cp_reconstruct(std::span<const Matrix> factors, const Vector& weights);

/// Least-squares weights for fixed loadings: argmin_l ||y - sum_r l_r a_{1,r} o ... ||.
Vector fit_weights(const DenseTensor& y, std::span<const Matrix> factors);

/// <y, a_{1,r} o ... o a_{d,r}> for every r.
Vector project_rank_one(const DenseTensor& y, std::span<const Matrix> factors);

}  // namespace cpd
