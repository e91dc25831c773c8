#include "cpd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cpd/error.hpp"

namespace cpd {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!all_finite(m)) throw InvalidArgument(std::string(what) + ": non-finite input");
}

Eigen::BDCSVD<Matrix> thin_svd(const Matrix& m, unsigned options) {
  Eigen::BDCSVD<Matrix> svd(m, options);
  if (svd.info() != Eigen::Success) throw NumericalError("SVD failed to converge");
  return svd;
}

// Diagonal similarity scaling D^{-1} M D that equalizes row and column norms
// (power-of-two factors, so the scaling itself is exact).
Vector balance(Matrix& m) {
  const Eigen::Index n = m.rows();
  Vector scale = Vector::Ones(n);
  constexpr double radix = 2.0;
  bool converged = false;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0;
      double r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(m(j, i));
        r += std::abs(m(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      const double s = c + r;
      double f = 1.0;
      double g = r / radix;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c >= g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        converged = false;
        scale(i) *= f;
        m.row(i) /= f;
        m.col(i) *= f;
      }
    }
  }
  return scale;
}

bool residual_ok(const Matrix& m, const EigenPairs& p) {
  const double norm_m = std::max(m.norm(), std::numeric_limits<double>::min());
  const ComplexMatrix mc = m.cast<std::complex<double>>();
  for (Eigen::Index j = 0; j < p.values.size(); ++j) {
    const double res = (mc * p.vectors.col(j) - p.values(j) * p.vectors.col(j)).norm();
    if (!(res <= 1e-8 * norm_m)) return false;
  }
  return true;
}

void normalize_and_sort(EigenPairs& p) {
  const Eigen::Index n = p.values.size();
  for (Eigen::Index j = 0; j < n; ++j) {
    const double nv = p.vectors.col(j).norm();
    if (nv > 0.0) p.vectors.col(j) /= nv;
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(p.values(a));
    const double mb = std::abs(p.values(b));
    if (ma != mb) return ma > mb;
    return p.values(a).real() > p.values(b).real();
  });
  EigenPairs sorted{ComplexVector(n), ComplexMatrix(n, n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    sorted.values(j) = p.values(order[static_cast<std::size_t>(j)]);
    sorted.vectors.col(j) = p.vectors.col(order[static_cast<std::size_t>(j)]);
  }
  p = std::move(sorted);
}

}  // namespace

bool all_finite(const Matrix& m) { return m.allFinite(); }

void fix_column_signs(Matrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Eigen::Index imax = 0;
    m.col(c).cwiseAbs().maxCoeff(&imax);
    if (m(imax, c) < 0.0) m.col(c) = -m.col(c);
  }
}

Matrix svd_r(const Matrix& m, std::size_t r) {
  require_finite(m, "svd_r");
  if (r < 1 || r > static_cast<std::size_t>(std::min(m.rows(), m.cols()))) {
    throw InvalidArgument("svd_r: rank " + std::to_string(r) + " out of range for " +
                          std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + " matrix");
  }
  const auto svd = thin_svd(m, Eigen::ComputeThinU);
  Matrix u = svd.matrixU().leftCols(static_cast<Eigen::Index>(r));
  fix_column_signs(u);
  return u;
}

Eigen::Index numerical_rank(const Matrix& m, double rcond) {
  require_finite(m, "numerical_rank");
  if (m.size() == 0) return 0;
  const auto svd = thin_svd(m, 0);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Eigen::Index k = 0;
  while (k < s.size() && s(k) > rcond * s(0)) ++k;
  return k;
}

Matrix pinv(const Matrix& m, double rcond) {
  require_finite(m, "pinv");
  const auto svd = thin_svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  Vector inv = Vector::Zero(s.size());
  if (s.size() > 0 && s(0) > 0.0) {
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > rcond * s(0)) inv(i) = 1.0 / s(i);
    }
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Matrix lstsq(const Matrix& a, const Matrix& b, double rcond) {
  require_finite(a, "lstsq");
  require_finite(b, "lstsq");
  if (a.rows() != b.rows()) throw InvalidArgument("lstsq: row count mismatch");
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  cod.setThreshold(rcond);
  cod.compute(a);
  return cod.solve(b);
}

EigenPairs eig(const Matrix& m) {
  require_finite(m, "eig");
  if (m.rows() != m.cols()) throw InvalidArgument("eig: matrix must be square");
  const Eigen::Index n = m.rows();
  if (n == 0) return {};

  // Route 1: balanced real Schur.
  {
    Matrix b = m;
    const Vector scale = balance(b);
    Eigen::EigenSolver<Matrix> es(b, true);
    if (es.info() == Eigen::Success) {
      EigenPairs p{es.eigenvalues(), scale.cast<std::complex<double>>().asDiagonal() * es.eigenvectors()};
      normalize_and_sort(p);
      if (residual_ok(m, p)) return p;
    }
  }
  // Route 2: unbalanced real Schur.
  {
    Eigen::EigenSolver<Matrix> es(m, true);
    if (es.info() == Eigen::Success) {
      EigenPairs p{es.eigenvalues(), es.eigenvectors()};
      normalize_and_sort(p);
      if (residual_ok(m, p)) return p;
    }
  }
  // Route 3: complex Schur.
  {
    Eigen::ComplexEigenSolver<ComplexMatrix> es(m.cast<std::complex<double>>(), true);
    if (es.info() == Eigen::Success) {
      EigenPairs p{es.eigenvalues(), es.eigenvectors()};
      normalize_and_sort(p);
      if (residual_ok(m, p)) return p;
    }
  }
  throw NumericalError("eig: no route met the residual bound");
}

}  // namespace cpd
