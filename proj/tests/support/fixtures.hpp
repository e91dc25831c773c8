#pragma once

#include <cmath>
#include <vector>

#include "cpd/cp_model.hpp"
#include "cpd/random.hpp"

namespace cpd::testing {

inline DenseTensor random_tensor(const Dims& dims, RandomSource& rng) {
  DenseTensor t(dims);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
  return t;
}

inline Matrix unit_columns(Eigen::Index rows, Eigen::Index cols, RandomSource& rng) {
  Matrix m = rng.normal_matrix(rows, cols);
  normalize_columns(m);
  return m;
}

inline CpModel random_model(const Dims& dims, std::size_t rank, RandomSource& rng) {
  CpModel m;
  m.lambdas = Vector::LinSpaced(static_cast<Eigen::Index>(rank), 1.0, static_cast<double>(rank));
  for (auto p : dims) m.factors.push_back(unit_columns(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(rank), rng));
  return m;
}

inline double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline double naive_norm(const DenseTensor& t) {
  double s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) s += t[i] * t[i];
  return std::sqrt(s);
}

}  // namespace cpd::testing
