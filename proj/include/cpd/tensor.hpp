#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cpd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Dims = std::vector<std::size_t>;

/// Dense real tensor of order d with row-major layout: index i_1 varies
/// slowest, i_d fastest. Mode indices in this API are zero-based.
///
/// An empty dimension vector denotes an order-0 tensor holding one scalar;
/// it only arises as the result of contracting every mode.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(Dims dims);
  DenseTensor(Dims dims, std::vector<double> values);

  static DenseTensor zeros(Dims dims) { return DenseTensor(std::move(dims)); }

  std::size_t order() const { return dims_.size(); }
  const Dims& dims() const { return dims_; }
  std::size_t dim(std::size_t k) const { return dims_.at(k); }
  std::size_t size() const { return values_.size(); }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  const double* data() const { return values_.data(); }
  double* data() { return values_.data(); }

  double& operator[](std::size_t offset) { return values_[offset]; }
  double operator[](std::size_t offset) const { return values_[offset]; }

  double& at(std::initializer_list<std::size_t> index);
  double at(std::initializer_list<std::size_t> index) const;
  double& at(std::span<const std::size_t> index);
  double at(std::span<const std::size_t> index) const;

  std::size_t offset(std::span<const std::size_t> index) const;

  bool all_finite() const;

  DenseTensor& operator+=(const DenseTensor& other);
  DenseTensor& operator-=(const DenseTensor& other);
  DenseTensor& operator*=(double s);

  friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

 private:
  Dims dims_;
  std::vector<double> values_ = std::vector<double>(1, 0.0);
};

DenseTensor operator+(DenseTensor a, const DenseTensor& b);
DenseTensor operator-(DenseTensor a, const DenseTensor& b);
DenseTensor operator*(double s, DenseTensor a);

std::size_t product(std::span<const std::size_t> dims);

/// Mode-k unfolding, p_k x prod_{h != k} p_h. Among the remaining modes the
/// smaller mode index varies fastest along the column index:
///   col(i) = sum_{h != k} i_h * prod_{m < h, m != k} p_m.
/// With this convention
///   unfold(X, k) = A_k diag(lambda) khatri_rao(A_d, ..., A_{k+1}, A_{k-1}, ..., A_1)^T
/// for X = sum_r lambda_r a_{1,r} o ... o a_{d,r}.
Matrix unfold(const DenseTensor& t, std::size_t k);

/// Inverse of unfold for the given target shape.
DenseTensor fold(const Matrix& m, std::size_t k, const Dims& dims);

/// t x_k b, replacing p_k by b.rows(). Requires b.cols() == p_k.
DenseTensor mode_product(const DenseTensor& t, std::size_t k, const Matrix& b);

/// Contracts each listed mode with its vector (t x_k w^T) and drops those
/// modes. The result keeps the surviving modes in ascending order.
DenseTensor contract_vectors(const DenseTensor& t, std::span<const std::size_t> modes,
                             std::span<const Vector> ws);

Matrix kronecker(const Matrix& a, const Matrix& b);

/// Column-wise Kronecker product of the operands in list order.
Matrix khatri_rao(std::span<const Matrix> mats);

/// khatri_rao(A_{d-1}, ..., A_0) skipping `skip_mode`; the operand order that
/// matches unfold().
Matrix khatri_rao_descending(std::span<const Matrix> factors, std::size_t skip_mode);

/// Element-wise product of the Gram matrices A_i^T A_i for every i != skip_mode.
/// Pass skip_mode >= factors.size() to include all factors.
Matrix hadamard_gram(std::span<const Matrix> factors, std::size_t skip_mode);

double frobenius_norm(const DenseTensor& t);
double inner(const DenseTensor& a, const DenseTensor& b);

/// Outer product of vectors v_1 o ... o v_n.
DenseTensor outer(std::span<const Vector> vs);

}  // namespace cpd
