#include "cpd/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "cpd/error.hpp"

namespace cpd {

namespace {

void check_mode(const DenseTensor& t, std::size_t k) {
  if (k >= t.order()) {
    throw InvalidArgument("mode " + std::to_string(k) + " out of range for order-" +
                          std::to_string(t.order()) + " tensor");
  }
}

// Column stride of each mode h != k in the mode-k unfolding.
std::vector<std::size_t> unfold_strides(const Dims& dims, std::size_t k) {
  std::vector<std::size_t> stride(dims.size(), 0);
  std::size_t s = 1;
  for (std::size_t h = 0; h < dims.size(); ++h) {
    if (h == k) continue;
    stride[h] = s;
    s *= dims[h];
  }
  return stride;
}

// Visits every multi-index in layout order, passing (flat offset, row, col)
// of the mode-k unfolding.
template <typename F>
void for_each_unfolded(const Dims& dims, std::size_t k, F&& f) {
  const auto stride = unfold_strides(dims, k);
  const std::size_t n = product(dims);
  const std::size_t d = dims.size();
  std::vector<std::size_t> idx(d, 0);
  std::size_t col = 0;
  for (std::size_t off = 0; off < n; ++off) {
    f(off, idx[k], col);
    // increment multi-index, last mode fastest
    for (std::size_t h = d; h-- > 0;) {
      if (++idx[h] < dims[h]) {
        col += stride[h];
        break;
      }
      col -= stride[h] * (dims[h] - 1);
      idx[h] = 0;
    }
  }
}

}  // namespace

std::size_t product(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

DenseTensor::DenseTensor(Dims dims) : dims_(std::move(dims)) {
  for (auto p : dims_) {
    if (p == 0) throw InvalidArgument("tensor dimensions must be positive");
  }
  values_.assign(product(dims_), 0.0);
}

DenseTensor::DenseTensor(Dims dims, std::vector<double> values) : DenseTensor(std::move(dims)) {
  if (values.size() != values_.size()) {
    throw InvalidArgument("value count " + std::to_string(values.size()) +
                          " does not match dimensions (" + std::to_string(values_.size()) + ")");
  }
  values_ = std::move(values);
}

std::size_t DenseTensor::offset(std::span<const std::size_t> index) const {
  if (index.size() != dims_.size()) throw InvalidArgument("index arity does not match tensor order");
  std::size_t off = 0;
  for (std::size_t h = 0; h < dims_.size(); ++h) {
    if (index[h] >= dims_[h]) throw InvalidArgument("tensor index out of range");
    off = off * dims_[h] + index[h];
  }
  return off;
}

double& DenseTensor::at(std::initializer_list<std::size_t> index) {
  return values_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}
double DenseTensor::at(std::initializer_list<std::size_t> index) const {
  return values_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}
double& DenseTensor::at(std::span<const std::size_t> index) { return values_[offset(index)]; }
double DenseTensor::at(std::span<const std::size_t> index) const { return values_[offset(index)]; }

bool DenseTensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
  if (other.dims_ != dims_) throw InvalidArgument("tensor shape mismatch in addition");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& other) {
  if (other.dims_ != dims_) throw InvalidArgument("tensor shape mismatch in subtraction");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

DenseTensor& DenseTensor::operator*=(double s) {
  for (auto& v : values_) v *= s;
  return *this;
}

DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }
DenseTensor operator*(double s, DenseTensor a) { return a *= s; }

Matrix unfold(const DenseTensor& t, std::size_t k) {
  check_mode(t, k);
  const auto rows = static_cast<Eigen::Index>(t.dim(k));
  const auto cols = static_cast<Eigen::Index>(t.size() / t.dim(k));
  Matrix m(rows, cols);
  const double* src = t.data();
  for_each_unfolded(t.dims(), k, [&](std::size_t off, std::size_t row, std::size_t col) {
    m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = src[off];
  });
  return m;
}

DenseTensor fold(const Matrix& m, std::size_t k, const Dims& dims) {
  if (k >= dims.size()) throw InvalidArgument("fold: mode out of range");
  const std::size_t n = product(dims);
  if (static_cast<std::size_t>(m.rows()) != dims[k] ||
      static_cast<std::size_t>(m.rows() * m.cols()) != n) {
    throw InvalidArgument("fold: matrix shape " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()) + " does not match target dimensions");
  }
  DenseTensor t(dims);
  double* dst = t.data();
  for_each_unfolded(dims, k, [&](std::size_t off, std::size_t row, std::size_t col) {
    dst[off] = m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  });
  return t;
}

DenseTensor mode_product(const DenseTensor& t, std::size_t k, const Matrix& b) {
  check_mode(t, k);
  if (static_cast<std::size_t>(b.cols()) != t.dim(k)) {
    throw InvalidArgument("mode_product: matrix has " + std::to_string(b.cols()) +
                          " columns, mode " + std::to_string(k) + " has size " +
                          std::to_string(t.dim(k)));
  }
  if (b.rows() == 0) throw InvalidArgument("mode_product: empty matrix");
  Dims out = t.dims();
  out[k] = static_cast<std::size_t>(b.rows());
  return fold(b * unfold(t, k), k, out);
}

DenseTensor contract_vectors(const DenseTensor& t, std::span<const std::size_t> modes,
                             std::span<const Vector> ws) {
  if (modes.size() != ws.size()) throw InvalidArgument("contract_vectors: one vector per mode required");
  std::vector<bool> seen(t.order(), false);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    check_mode(t, modes[i]);
    if (seen[modes[i]]) throw InvalidArgument("contract_vectors: duplicate mode");
    seen[modes[i]] = true;
    if (static_cast<std::size_t>(ws[i].size()) != t.dim(modes[i])) {
      throw InvalidArgument("contract_vectors: vector length does not match mode size");
    }
  }
  if (modes.empty()) return t;

  Dims out_dims;
  for (std::size_t h = 0; h < t.order(); ++h) {
    if (!seen[h]) out_dims.push_back(t.dim(h));
  }
  std::vector<const Vector*> w_of(t.order(), nullptr);
  for (std::size_t i = 0; i < modes.size(); ++i) w_of[modes[i]] = &ws[i];

  // One pass over the input: each entry is weighted by the product of the
  // contracted coordinates and accumulated into its surviving multi-index.
  DenseTensor out(out_dims);
  const std::size_t d = t.order();
  std::vector<std::size_t> idx(d, 0);
  const std::size_t n = t.size();
  for (std::size_t off = 0; off < n; ++off) {
    double w = 1.0;
    std::size_t o = 0;
    for (std::size_t h = 0; h < d; ++h) {
      if (w_of[h]) {
        w *= (*w_of[h])(static_cast<Eigen::Index>(idx[h]));
      } else {
        o = o * t.dim(h) + idx[h];
      }
    }
    out[o] += w * t[off];
    for (std::size_t h = d; h-- > 0;) {
      if (++idx[h] < t.dim(h)) break;
      idx[h] = 0;
    }
  }
  return out;
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index s = 0; s < a.cols(); ++s) {
      out.block(r * b.rows(), s * b.cols(), b.rows(), b.cols()) = a(r, s) * b;
    }
  }
  return out;
}

Matrix khatri_rao(std::span<const Matrix> mats) {
  if (mats.empty()) throw InvalidArgument("khatri_rao: no operands");
  const auto R = mats.front().cols();
  for (const auto& m : mats) {
    if (m.cols() != R) throw InvalidArgument("khatri_rao: operands differ in column count");
  }
  Matrix out = mats.front();
  for (std::size_t i = 1; i < mats.size(); ++i) {
    const Matrix& b = mats[i];
    Matrix next(out.rows() * b.rows(), R);
    for (Eigen::Index r = 0; r < R; ++r) {
      for (Eigen::Index j = 0; j < out.rows(); ++j) {
        next.col(r).segment(j * b.rows(), b.rows()) = out(j, r) * b.col(r);
      }
    }
    out = std::move(next);
  }
  return out;
}

Matrix khatri_rao_descending(std::span<const Matrix> factors, std::size_t skip_mode) {
  std::vector<Matrix> ops;
  for (std::size_t h = factors.size(); h-- > 0;) {
    if (h != skip_mode) ops.push_back(factors[h]);
  }
  return khatri_rao(ops);
}

Matrix hadamard_gram(std::span<const Matrix> factors, std::size_t skip_mode) {
  if (factors.empty()) throw InvalidArgument("hadamard_gram: no factors");
  const auto R = factors.front().cols();
  Matrix g = Matrix::Ones(R, R);
  for (std::size_t h = 0; h < factors.size(); ++h) {
    if (h == skip_mode) continue;
    if (factors[h].cols() != R) throw InvalidArgument("hadamard_gram: column count mismatch");
    g.array() *= (factors[h].transpose() * factors[h]).array();
  }
  return g;
}

double frobenius_norm(const DenseTensor& t) {
  double s = 0.0;
  for (double v : t.values()) s += v * v;
  return std::sqrt(s);
}

double inner(const DenseTensor& a, const DenseTensor& b) {
  if (a.dims() != b.dims()) throw InvalidArgument("inner: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

DenseTensor outer(std::span<const Vector> vs) {
  Dims dims;
  for (const auto& v : vs) dims.push_back(static_cast<std::size_t>(v.size()));
  DenseTensor t(dims);
  const std::size_t d = vs.size();
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t off = 0; off < t.size(); ++off) {
    double x = 1.0;
    for (std::size_t h = 0; h < d; ++h) x *= vs[h](static_cast<Eigen::Index>(idx[h]));
    t[off] = x;
    for (std::size_t h = d; h-- > 0;) {
      if (++idx[h] < dims[h]) break;
      idx[h] = 0;
    }
  }
  return t;
}

}  // namespace cpd
