#pragma once

#include <complex>

#include "cpd/tensor.hpp"

namespace cpd {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Singular values below rcond * sigma_max are treated as zero by pinv and lstsq.
inline constexpr double kDefaultRcond = 1e-12;

/// Eigenpairs of a real square matrix. Column j of `vectors` has unit norm and
/// belongs to values(j). Pairs are sorted by descending modulus, ties by
/// descending real part.
struct EigenPairs {
  ComplexVector values;
  ComplexMatrix vectors;
};

/// Top-r left singular vectors. Each column is sign-fixed so that its
/// largest-magnitude entry is positive.
Matrix svd_r(const Matrix& m, std::size_t r);

/// Moore-Penrose pseudoinverse via SVD.
Matrix pinv(const Matrix& m, double rcond = kDefaultRcond);

/// Numerical rank at the given relative tolerance.
Eigen::Index numerical_rank(const Matrix& m, double rcond = kDefaultRcond);

/// Minimum-norm least-squares solution of a X = b.
Matrix lstsq(const Matrix& a, const Matrix& b, double rcond = kDefaultRcond);

/// Eigen-decomposition of a general real matrix. The matrix is balanced
/// before the QR iteration; if that fails the unbalanced matrix and then a
/// complex Schur route are tried before giving up with NumericalError.
EigenPairs eig(const Matrix& m);

/// Flips each column so that its largest-magnitude entry is positive.
void fix_column_signs(Matrix& m);

bool all_finite(const Matrix& m);

}  // namespace cpd
