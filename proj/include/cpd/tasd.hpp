#pragma once

#include <cstdint>
#include <vector>

#include "cpd/als.hpp"
#include "cpd/random.hpp"
#include "cpd/tucker.hpp"

namespace cpd {

enum class Alignment {
  /// Exhaustive search while (R!)^(d-1) fits the budget, Part II otherwise.
  Auto,
  /// Least-squares row split followed by rank-one ALS per row.
  PartTwo,
  /// Search over all permutation combinations.
  Exhaustive,
};

struct TasdOptions {
  /// Zero-based mode whose loadings come from the diagonalization; its
  /// partner mode is h + 1, so h must not be the last mode.
  std::size_t mode_h = 0;
  /// Probe redraws allowed when the eigenvalues nearly coincide.
  int retries = 5;
  int hooi_max_iters = 50;
  double hooi_tol = 1e-10;
  Alignment alignment = Alignment::Auto;
  std::uint64_t exhaustive_budget = 1'000'000;
  /// Rank-one solves inside Part II.
  AlsOptions rank_one{};
  /// Refinement stage of tasd_als.
  AlsOptions als{};
};

/// Classic simultaneous diagonalization on the full tensor: Gaussian probes
/// on modes 3..d, eigenvectors of M_1 M_2^+ for the R largest eigenvalues.
/// Returns the p_1 x R estimate of A_1 with unit columns.
Matrix simdiag_full(const DenseTensor& y, std::size_t rank, RandomSource& rng, int retries = 5);

/// Diagonalization on the HOOI core: Â_h = Û_h Re(V̂_h), columns normalized.
Matrix tasd_part1(const DenseTensor& y, std::size_t rank, const TasdOptions& opts, RandomSource& rng);

/// Same as tasd_part1 for an already computed rank-(R,...,R) Tucker model and
/// an explicit partner mode.
Matrix tasd_part1_from_tucker(const TuckerModel& tucker, std::size_t mode, std::size_t partner,
                              RandomSource& rng, int retries);

/// Recovers the loadings of every other mode, column-aligned with a_h:
/// rows of pinv(a_h) unfold(y, h) are folded into order-(d-1) tensors and
/// each is fitted by rank-one ALS. Returns d factors (position h holds a_h
/// with unit columns).
std::vector<Matrix> tasd_part2(const DenseTensor& y, std::size_t rank, const Matrix& a_h, std::size_t h,
                               const TasdOptions& opts = {});

struct AlignResult {
  /// perms[k][r] is the column of input factor k placed at position r.
  /// perms[0] is always the identity.
  std::vector<std::vector<std::size_t>> perms;
  CpModel model;
  double residual = 0.0;
};

/// (R!)^(d-1), saturating at UINT64_MAX.
std::uint64_t permutation_combinations(std::size_t rank, std::size_t order);

/// Picks the column permutations of modes 2..d minimising the residual of
/// the least-squares weight fit. Enumerates permutation tuples in
/// lexicographic order and keeps the first minimum.
AlignResult align_exhaustive(const DenseTensor& y, std::span<const Matrix> factors,
                             std::uint64_t budget = 1'000'000);

/// TASD initializer: HOOI, diagonalization for mode h, then alignment per
/// opts.alignment. Weights are least-squares magnitudes.
AlsResult tasd(const DenseTensor& y, std::size_t rank, const TasdOptions& opts, RandomSource& rng,
               const CpModel* truth = nullptr);

/// tasd followed by ALS.
AlsResult tasd_als(const DenseTensor& y, std::size_t rank, const TasdOptions& opts, RandomSource& rng,
                   const CpModel* truth = nullptr);

/// Stores |w_r| as the weights and moves the sign into column r of factor 0.
CpModel make_model(std::vector<Matrix> factors, const Vector& weights);

}  // namespace cpd
