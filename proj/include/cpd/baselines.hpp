#pragma once

#include "cpd/als.hpp"
#include "cpd/random.hpp"
#include "cpd/tasd.hpp"

namespace cpd {

struct RepeatOptions {
  AlsOptions als{};
  /// Rank-one runs per requested component; the first run uses the spectral
  /// start, the rest start from random unit vectors.
  int restarts_per_component = 10;
  /// Two runs landed on the same component when every mode's sign distance
  /// is below this.
  double same_component_tol = 0.2;
  /// Sweeps of residual removal after selection: each component is refit by
  /// rank-one ALS on y minus the other components. 0 turns it off.
  int refine_sweeps = 10;
};

/// Rank-one ALS run repeatedly on the same tensor (no deflation). Among the
/// distinct limits, the R that fit y best by least squares are kept (the R
/// heaviest when there are too many subsets to try). When fewer than R
/// distinct limits are found, each missing slot starts from a rank-one fit
/// of the unexplained part. Then refined.
AlsResult r1_als_repeat(const DenseTensor& y, std::size_t rank, const RepeatOptions& opts, RandomSource& rng);

/// Rank-one ALS with deflation: fit, subtract the fitted term, repeat R times.
AlsResult r1_als_deflate(const DenseTensor& y, std::size_t rank, const AlsOptions& opts);

/// Unit-sphere random columns for every mode.
std::vector<Matrix> random_factors(const Dims& dims, std::size_t rank, RandomSource& rng);

/// ALS from random unit-sphere columns.
AlsResult als_random(const DenseTensor& y, std::size_t rank, const AlsOptions& opts, RandomSource& rng,
                     const CpModel* truth = nullptr);

/// Simultaneous diagonalization on the full tensor for mode 0, the other
/// modes completed by the same row-split procedure TASD uses.
AlsResult simdiag(const DenseTensor& y, std::size_t rank, const TasdOptions& opts, RandomSource& rng,
                  const CpModel* truth = nullptr);

}  // namespace cpd
