#pragma once

#include <cstdint>
#include <random>

#include "cpd/tensor.hpp"

namespace cpd {

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Reproducible random stream identified by (seed, stream).
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Variates use fixed transforms rather than the
/// implementation-defined std:: distributions:
///   uniform: top 53 bits of one draw scaled to [0, 1)
///   normal:  Box-Muller on two uniforms, both outputs consumed in order
class RandomSource {
 public:
  RandomSource(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Independent child stream; the same `tag` always yields the same child.
  RandomSource derive(std::uint64_t tag) const;

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

  Vector normal_vector(Eigen::Index n);
  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cpd
