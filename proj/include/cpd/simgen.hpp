#pragma once

#include <string>
#include <variant>
#include <vector>

#include "cpd/cp_model.hpp"
#include "cpd/random.hpp"

namespace cpd {

// lambda_r = r.
struct LambdaRank {};
struct LambdaConstant {
  double value = 1.0;
};
struct LambdaList {
  std::vector<double> values;
};
using LambdaRule = std::variant<LambdaRank, LambdaConstant, LambdaList>;

enum class LoadingRule {
  /// Unif[-1, 1] entries, unit columns; lambda as given.
  Uniform,
  /// Unif[-1, 1] entries left unnormalized, so X = sum_r lambda_r a~_{1,r} o ... o a~_{d,r}
  /// with raw columns. The model stores unit columns and folds the column
  /// norms into lambda.
  UniformRaw,
  Coherent,
};

/// One synthetic scenario: Y = X + sigma Z with X drawn per the rules.
struct ScenarioSpec {
  Dims dims;
  std::size_t rank = 1;
  LambdaRule lambdas = LambdaRank{};
  LoadingRule loadings = LoadingRule::Uniform;
  double xi = 0.0;
  double sigma = 0.0;
  int replicates = 1;
  std::vector<std::string> methods;

  void validate() const;
};

Vector make_lambdas(const LambdaRule& rule, std::size_t rank);

/// Loading entries i.i.d. Unif[-1, 1], columns scaled to unit norm. With
/// fold_norms the removed norms multiply the weights.
CpModel gen_uniform_model(const Dims& dims, std::size_t rank, const Vector& lambdas, RandomSource& rng,
                          bool fold_norms = false);

/// Haar-distributed orthonormal columns right-multiplied by the upper
/// triangular L with L^T L = (1 - xi) I + xi 11^T, so every pair of distinct
/// columns in a mode has inner product exactly xi.
CpModel gen_coherent_model(const Dims& dims, std::size_t rank, double xi, const Vector& lambdas,
                           RandomSource& rng);

/// x + sigma z with z i.i.d. standard normal.
DenseTensor add_noise(const DenseTensor& x, double sigma, RandomSource& rng);

/// Model for a scenario (uses spec.loadings, spec.xi, spec.lambdas).
CpModel gen_model(const ScenarioSpec& spec, RandomSource& rng);

}  // namespace cpd
