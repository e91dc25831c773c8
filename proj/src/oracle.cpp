#include "cpd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cpd/error.hpp"
#include "cpd/linalg.hpp"

namespace cpd::oracle {

namespace {

// Advances a row-major multi-index; returns false after the last one.
bool next_index(std::vector<std::size_t>& idx, const Dims& dims) {
  for (std::size_t h = dims.size(); h-- > 0;) {
    if (++idx[h] < dims[h]) return true;
    idx[h] = 0;
  }
  return false;
}

std::size_t unfold_column(const std::vector<std::size_t>& idx, const Dims& dims, std::size_t k) {
  std::size_t col = 0;
  std::size_t weight = 1;
  for (std::size_t h = 0; h < dims.size(); ++h) {
    if (h == k) continue;
    col += idx[h] * weight;
    weight *= dims[h];
  }
  return col;
}

}  // namespace

Matrix naive_unfold(const DenseTensor& t, std::size_t k) {
  const Dims& dims = t.dims();
  if (k >= dims.size()) throw InvalidArgument("naive_unfold: mode out of range");
  Matrix m(static_cast<Eigen::Index>(dims[k]), static_cast<Eigen::Index>(t.size() / dims[k]));
  std::vector<std::size_t> idx(dims.size(), 0);
  do {
    m(static_cast<Eigen::Index>(idx[k]), static_cast<Eigen::Index>(unfold_column(idx, dims, k))) = t.at(idx);
  } while (next_index(idx, dims));
  return m;
}

DenseTensor naive_mode_product(const DenseTensor& t, std::size_t k, const Matrix& b) {
  Dims out_dims = t.dims();
  out_dims.at(k) = static_cast<std::size_t>(b.rows());
  DenseTensor out(out_dims);
  std::vector<std::size_t> idx(out_dims.size(), 0);
  do {
    std::vector<std::size_t> src = idx;
    double s = 0.0;
    for (std::size_t j = 0; j < t.dim(k); ++j) {
      src[k] = j;
      s += t.at(src) * b(static_cast<Eigen::Index>(idx[k]), static_cast<Eigen::Index>(j));
    }
    out.at(idx) = s;
  } while (next_index(idx, out_dims));
  return out;
}

DenseTensor naive_reconstruct(const CpModel& m) {
  const Dims dims = m.dims();
  DenseTensor out(dims);
  std::vector<std::size_t> idx(dims.size(), 0);
  do {
    double s = 0.0;
    for (Eigen::Index r = 0; r < m.lambdas.size(); ++r) {
      double term = m.lambdas(r);
      for (std::size_t h = 0; h < dims.size(); ++h) term *= m.factors[h](static_cast<Eigen::Index>(idx[h]), r);
      s += term;
    }
    out.at(idx) = s;
  } while (next_index(idx, dims));
  return out;
}

Matrix naive_mode_ls(const DenseTensor& y, std::span<const Matrix> factors, std::size_t k) {
  const Dims& dims = y.dims();
  if (factors.size() != dims.size() || k >= dims.size()) throw InvalidArgument("naive_mode_ls: bad arguments");
  const auto R = factors.front().cols();
  const std::size_t ncols = y.size() / dims[k];

  // Row j of the design matrix is indexed by the unfolding column of the
  // multi-index; entry (j, r) = prod_{h != k} a_{h,r}(i_h).
  Matrix design = Matrix::Zero(static_cast<Eigen::Index>(ncols), R);
  Matrix target = Matrix::Zero(static_cast<Eigen::Index>(ncols), static_cast<Eigen::Index>(dims[k]));
  std::vector<std::size_t> idx(dims.size(), 0);
  do {
    const auto j = static_cast<Eigen::Index>(unfold_column(idx, dims, k));
    for (Eigen::Index r = 0; r < R; ++r) {
      double v = 1.0;
      for (std::size_t h = 0; h < dims.size(); ++h) {
        if (h != k) v *= factors[h](static_cast<Eigen::Index>(idx[h]), r);
      }
      design(j, r) = v;
    }
    target(j, static_cast<Eigen::Index>(idx[k])) = y.at(idx);
  } while (next_index(idx, dims));
  // min ||design B^T - target||  <=>  B^T = lstsq(design, target)
  return lstsq(design, target).transpose();
}

PermutationFit enumerate_permutations_loss(const DenseTensor& y, std::span<const Matrix> factors,
                                           std::uint64_t budget) {
  const std::size_t d = factors.size();
  if (d != y.order() || d < 2) throw InvalidArgument("enumerate_permutations_loss: one factor per mode required");
  const auto R = static_cast<std::size_t>(factors.front().cols());
  std::uint64_t fact = 1;
  for (std::size_t i = 2; i <= R; ++i) fact *= i;
  double combos = 1.0;
  for (std::size_t k = 1; k < d; ++k) combos *= static_cast<double>(fact);
  if (combos > static_cast<double>(budget)) throw InvalidArgument("enumerate_permutations_loss: budget exceeded");

  const Dims& dims = y.dims();
  const Vector yvec = Eigen::Map<const Vector>(y.data(), static_cast<Eigen::Index>(y.size()));

  // Enumerate all tuples up front, in lexicographic order.
  std::vector<std::size_t> ident(R);
  std::iota(ident.begin(), ident.end(), std::size_t{0});
  std::vector<std::vector<std::size_t>> single;
  {
    auto p = ident;
    do single.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
  }
  std::vector<std::vector<std::vector<std::size_t>>> tuples{{}};
  for (std::size_t k = 1; k < d; ++k) {
    std::vector<std::vector<std::vector<std::size_t>>> next;
    for (const auto& t : tuples) {
      for (const auto& p : single) {
        auto u = t;
        u.push_back(p);
        next.push_back(std::move(u));
      }
    }
    tuples = std::move(next);
  }

  PermutationFit best;
  best.residual = std::numeric_limits<double>::infinity();
  for (const auto& tuple : tuples) {
    Matrix design(static_cast<Eigen::Index>(y.size()), static_cast<Eigen::Index>(R));
    std::vector<std::size_t> idx(d, 0);
    std::size_t row = 0;
    do {
      for (std::size_t r = 0; r < R; ++r) {
        double v = factors[0](static_cast<Eigen::Index>(idx[0]), static_cast<Eigen::Index>(r));
        for (std::size_t h = 1; h < d; ++h) {
          v *= factors[h](static_cast<Eigen::Index>(idx[h]), static_cast<Eigen::Index>(tuple[h - 1][r]));
        }
        design(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(r)) = v;
      }
      ++row;
    } while (next_index(idx, dims));
    const Vector w = lstsq(design, yvec);
    const double res = (yvec - design * w).norm();
    if (res < best.residual) {
      best.residual = res;
      best.perms.assign(1, ident);
      best.perms.insert(best.perms.end(), tuple.begin(), tuple.end());
    }
  }
  return best;
}

}  // namespace cpd::oracle
