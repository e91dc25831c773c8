#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cpd/cp_model.hpp"

namespace cpd {

struct AlsOptions {
  int max_iters = 100;
  /// Stop when every column moves by at most this much (sign-aware) in a sweep.
  double tol = 1e-8;
  bool record_trace = true;
};

/// Per-run record. Traces are indexed by iteration; index 0 is the
/// initialization, so a trace holds iterations + 1 entries when recorded.
struct RunReport {
  std::string method;
  /// Loading error against a supplied ground truth (empty without one).
  std::vector<double> loss_trace;
  /// ||y - X^(t)||_F.
  std::vector<double> residual_trace;
  int iterations = 0;
  bool converged = false;
  double wall_ms = 0.0;
  std::uint64_t seed = 0;
  /// Named phase timings in milliseconds, in execution order.
  std::vector<std::pair<std::string, double>> phases;

  /// First t with loss_trace[t] < threshold, or nullopt.
  std::optional<int> iterations_to(double threshold) const;
};

struct AlsResult {
  CpModel model;
  DenseTensor signal;
  RunReport report;
};

/// Relative norm below which an update column counts as zero.
inline constexpr double kZeroNormTol = 1e-14;

/// Leading left singular vector of every unfolding, sign-fixed.
std::vector<Vector> r1_init(const DenseTensor& y);

/// Rank-one ALS (tensor power iteration). Each update contracts y with the
/// current unit vectors of the other modes and renormalizes.
AlsResult r1_als(const DenseTensor& y, const AlsOptions& opts = {},
                 const std::optional<std::vector<Vector>>& init = std::nullopt,
                 const CpModel* truth = nullptr);

/// argmin_B ||unfold(y, k) - B khatri_rao(A_i, i != k)^T||_F via the R x R
/// Gram system, falling back to an SVD pseudoinverse when the Gram matrix is
/// too ill-conditioned.
Matrix als_update_mode(const DenseTensor& y, std::span<const Matrix> factors, std::size_t k);

/// General-rank ALS from the given initial loadings. Columns of `init` are
/// normalized first.
AlsResult als(const DenseTensor& y, std::vector<Matrix> init, const AlsOptions& opts = {},
              const CpModel* truth = nullptr);

/// |lambda_r| = ||b_{1,r}|| and X = sum_r b_{1,r} o a_{2,r} o ... o a_{d,r}.
std::pair<Vector, DenseTensor> estimate_lambda_signal(const DenseTensor& y,
                                                      std::span<const Matrix> factors,
                                                      const Matrix& b1);

/// Largest sign-aware column displacement between two factor sets.
double max_column_change(std::span<const Matrix> before, std::span<const Matrix> after);

}  // namespace cpd
