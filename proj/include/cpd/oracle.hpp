#pragma once

// Deliberately naive reference implementations. They share no code path with
// the production kernels beyond DenseTensor element access and lstsq, and
// exist to cross-check those kernels on small inputs.

#include <cstdint>
#include <span>
#include <vector>

#include "cpd/cp_model.hpp"

namespace cpd::oracle {

/// Element-by-element mode-k unfolding straight from the index map.
Matrix naive_unfold(const DenseTensor& t, std::size_t k);

/// Mode-k least-squares update with an explicitly materialized Khatri-Rao
/// matrix (built by nested loops) solved by lstsq. Small instances only.
Matrix naive_mode_ls(const DenseTensor& y, std::span<const Matrix> factors, std::size_t k);

/// Entry-wise reconstruction by nested sums over r.
DenseTensor naive_reconstruct(const CpModel& m);

/// t x_k b by direct summation.
DenseTensor naive_mode_product(const DenseTensor& t, std::size_t k, const Matrix& b);

struct PermutationFit {
  std::vector<std::vector<std::size_t>> perms;
  double residual = 0.0;
};

/// Full enumeration of the column permutations of modes 2..d; for each, the
/// design matrix of vectorized rank-one terms is built explicitly and the
/// weights fitted by lstsq. Returns the first minimiser in lexicographic
/// order of the permutation tuple.
PermutationFit enumerate_permutations_loss(const DenseTensor& y, std::span<const Matrix> factors,
                                           std::uint64_t budget = 1'000'000);

}  // namespace cpd::oracle
