#include "cpd/tucker.hpp"

#include <cmath>
#include <string>

#include "cpd/error.hpp"
#include "cpd/linalg.hpp"

namespace cpd {

namespace {

void check_ranks(const DenseTensor& y, const std::vector<std::size_t>& ranks) {
  if (ranks.size() != y.order()) {
    throw InvalidArgument("Tucker ranks: expected " + std::to_string(y.order()) + " entries, got " +
                          std::to_string(ranks.size()));
  }
  for (std::size_t k = 0; k < ranks.size(); ++k) {
    const std::size_t cols = y.size() / y.dim(k);
    if (ranks[k] < 1 || ranks[k] > y.dim(k) || ranks[k] > cols) {
      throw InvalidArgument("Tucker rank " + std::to_string(ranks[k]) + " out of range for mode " +
                            std::to_string(k));
    }
  }
}

// y multiplied by U_h^T on every mode except `keep`.
DenseTensor project_except(const DenseTensor& y, const std::vector<Matrix>& factors, std::size_t keep) {
  DenseTensor t = y;
  for (std::size_t h = 0; h < factors.size(); ++h) {
    if (h != keep) t = mode_product(t, h, factors[h].transpose());
  }
  return t;
}

}  // namespace

std::vector<Matrix> hosvd(const DenseTensor& y, const std::vector<std::size_t>& ranks) {
  check_ranks(y, ranks);
  if (!y.all_finite()) throw InvalidArgument("hosvd: non-finite values");
  std::vector<Matrix> u;
  u.reserve(y.order());
  for (std::size_t k = 0; k < y.order(); ++k) u.push_back(svd_r(unfold(y, k), ranks[k]));
  return u;
}

DenseTensor tucker_core(const DenseTensor& y, const std::vector<Matrix>& factors) {
  DenseTensor t = y;
  for (std::size_t h = 0; h < factors.size(); ++h) t = mode_product(t, h, factors[h].transpose());
  return t;
}

DenseTensor tucker_reconstruct(const DenseTensor& core, const std::vector<Matrix>& factors) {
  DenseTensor t = core;
  for (std::size_t h = 0; h < factors.size(); ++h) t = mode_product(t, h, factors[h]);
  return t;
}

TuckerModel hooi(const DenseTensor& y, const TuckerOptions& opts) {
  if (opts.max_iters < 0) throw InvalidArgument("hooi: max_iters must be nonnegative");
  TuckerModel out;
  out.factors = hosvd(y, opts.ranks);
  out.core = tucker_core(y, out.factors);
  out.fit_trace.push_back(frobenius_norm(out.core));

  for (int it = 0; it < opts.max_iters; ++it) {
    for (std::size_t k = 0; k < y.order(); ++k) {
      const DenseTensor partial = project_except(y, out.factors, k);
      out.factors[k] = svd_r(unfold(partial, k), opts.ranks[k]);
    }
    out.core = tucker_core(y, out.factors);
    const double fit = frobenius_norm(out.core);
    const double prev = out.fit_trace.back();
    out.fit_trace.push_back(fit);
    out.iterations = it + 1;
    if (std::abs(fit - prev) <= opts.tol * std::max(fit, std::numeric_limits<double>::min())) break;
  }
  out.residual = frobenius_norm(y - tucker_reconstruct(out.core, out.factors));
  return out;
}

}  // namespace cpd
