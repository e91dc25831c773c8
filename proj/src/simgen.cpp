#include "cpd/simgen.hpp"

#include <cmath>
#include <string>

#include "cpd/error.hpp"

namespace cpd {

void ScenarioSpec::validate() const {
  if (dims.empty()) throw InvalidArgument("scenario: dims must not be empty");
  for (auto p : dims) {
    if (p < 1) throw InvalidArgument("scenario: dimensions must be positive");
  }
  if (rank < 1) throw InvalidArgument("scenario: rank must be at least 1");
  if (replicates < 1) throw InvalidArgument("scenario: replicates must be at least 1");
  if (!(sigma >= 0.0)) throw InvalidArgument("scenario: sigma must be nonnegative");
  if (loadings == LoadingRule::Coherent) {
    if (!(xi >= 0.0 && xi < 1.0)) throw InvalidArgument("scenario: xi must lie in [0, 1)");
    for (auto p : dims) {
      if (rank > p) throw InvalidArgument("scenario: coherent loadings need rank <= every dimension");
    }
  }
}

Vector make_lambdas(const LambdaRule& rule, std::size_t rank) {
  const auto R = static_cast<Eigen::Index>(rank);
  return std::visit(
      [R](const auto& r) -> Vector {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, LambdaRank>) {
          return Vector::LinSpaced(R, 1.0, static_cast<double>(R));
        } else if constexpr (std::is_same_v<T, LambdaConstant>) {
          return Vector::Constant(R, r.value);
        } else {
          if (r.values.size() != static_cast<std::size_t>(R)) {
            throw InvalidArgument("lambda list has " + std::to_string(r.values.size()) + " entries, rank is " +
                                  std::to_string(R));
          }
          return Eigen::Map<const Vector>(r.values.data(), R);
        }
      },
      rule);
}

CpModel gen_uniform_model(const Dims& dims, std::size_t rank, const Vector& lambdas, RandomSource& rng,
                          bool fold_norms) {
  if (rank < 1) throw InvalidArgument("gen_uniform_model: rank must be at least 1");
  if (static_cast<std::size_t>(lambdas.size()) != rank) throw InvalidArgument("gen_uniform_model: lambda count mismatch");
  CpModel m;
  m.lambdas = lambdas;
  const auto R = static_cast<Eigen::Index>(rank);
  for (auto p : dims) {
    Matrix a(static_cast<Eigen::Index>(p), R);
    for (Eigen::Index r = 0; r < R; ++r) {
      double n = 0.0;
      do {
        for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, r) = rng.uniform(-1.0, 1.0);
        n = a.col(r).norm();
      } while (n < 1e-12);
      a.col(r) /= n;
      if (fold_norms) m.lambdas(r) *= n;
    }
    m.factors.push_back(std::move(a));
  }
  return m;
}

CpModel gen_coherent_model(const Dims& dims, std::size_t rank, double xi, const Vector& lambdas,
                           RandomSource& rng) {
  if (!(xi >= 0.0 && xi < 1.0)) throw InvalidArgument("gen_coherent_model: xi must lie in [0, 1)");
  if (static_cast<std::size_t>(lambdas.size()) != rank) throw InvalidArgument("gen_coherent_model: lambda count mismatch");
  const auto R = static_cast<Eigen::Index>(rank);
  Matrix target = Matrix::Constant(R, R, xi);
  target.diagonal().setOnes();
  Eigen::LLT<Matrix> llt(target);
  if (llt.info() != Eigen::Success) throw InvalidArgument("gen_coherent_model: target Gram is not positive definite");
  const Matrix upper = llt.matrixU();

  CpModel m;
  m.lambdas = lambdas;
  for (auto p : dims) {
    if (rank > p) throw InvalidArgument("gen_coherent_model: rank exceeds dimension " + std::to_string(p));
    const Matrix g = rng.normal_matrix(static_cast<Eigen::Index>(p), R);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(g.rows(), R);
    const Matrix rr = qr.matrixQR().topRows(R).triangularView<Eigen::Upper>();
    // Sign fix makes the Q factor Haar distributed.
    for (Eigen::Index r = 0; r < R; ++r) {
      if (rr(r, r) < 0.0) q.col(r) = -q.col(r);
    }
    Matrix a = q * upper;
    // Columns have unit norm analytically; renormalize away the rounding.
    normalize_columns(a);
    m.factors.push_back(std::move(a));
  }
  return m;
}

DenseTensor add_noise(const DenseTensor& x, double sigma, RandomSource& rng) {
  if (!(sigma >= 0.0)) throw InvalidArgument("add_noise: sigma must be nonnegative");
  DenseTensor y = x;
  if (sigma == 0.0) return y;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += sigma * rng.normal();
  return y;
}

CpModel gen_model(const ScenarioSpec& spec, RandomSource& rng) {
  const Vector lambdas = make_lambdas(spec.lambdas, spec.rank);
  if (spec.loadings == LoadingRule::Coherent) return gen_coherent_model(spec.dims, spec.rank, spec.xi, lambdas, rng);
  return gen_uniform_model(spec.dims, spec.rank, lambdas, rng, spec.loadings == LoadingRule::UniformRaw);
}

}  // namespace cpd
