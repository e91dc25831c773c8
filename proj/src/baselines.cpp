#include "cpd/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

#include "cpd/error.hpp"
#include "cpd/loss.hpp"

namespace cpd {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void check_rank(const DenseTensor& y, std::size_t rank, const char* who) {
  if (rank < 1) throw InvalidArgument(std::string(who) + ": rank must be at least 1");
  if (y.order() < 2) throw InvalidArgument(std::string(who) + ": tensor order must be at least 2");
}

struct Component {
  double weight;
  std::vector<Vector> vectors;
};

bool same_component(const Component& a, const Component& b, double tol) {
  for (std::size_t k = 0; k < a.vectors.size(); ++k) {
    if (sign_distance(a.vectors[k], b.vectors[k]) >= tol) return false;
  }
  return true;
}

CpModel assemble(const std::vector<Component>& comps, const Dims& dims) {
  CpModel m;
  const auto R = static_cast<Eigen::Index>(comps.size());
  m.lambdas.resize(R);
  for (std::size_t k = 0; k < dims.size(); ++k) m.factors.emplace_back(static_cast<Eigen::Index>(dims[k]), R);
  for (Eigen::Index r = 0; r < R; ++r) {
    const auto& c = comps[static_cast<std::size_t>(r)];
    m.lambdas(r) = c.weight;
    for (std::size_t k = 0; k < dims.size(); ++k) m.factors[k].col(r) = c.vectors[k];
  }
  return m;
}

Component component_of(const AlsResult& r) {
  Component c{r.model.lambdas(0), {}};
  for (const auto& f : r.model.factors) c.vectors.emplace_back(f.col(0));
  return c;
}

DenseTensor outer_term(const Component& c, const Dims& dims) {
  CpModel m = assemble({c}, dims);
  return cp_reconstruct(m);
}

// Residual of the least-squares fit of y on the chosen components.
double subset_residual(const DenseTensor& y, const std::vector<Component>& comps) {
  const CpModel m = assemble(comps, y.dims());
  const Vector w = fit_weights(y, m.factors);
  return frobenius_norm(y - cp_reconstruct(m.factors, w));
}

// Best-fitting R of the candidates; candidates arrive sorted by weight.
std::vector<Component> select_components(const DenseTensor& y, const std::vector<Component>& found,
                                         std::size_t rank, const AlsOptions& inner) {
  std::vector<Component> chosen;
  if (found.size() <= rank) {
    // missing slots start from rank-one fits of what is left unexplained
    chosen = found;
    DenseTensor rest = y;
    for (const auto& c : chosen) rest -= outer_term(c, y.dims());
    while (chosen.size() < rank) {
      Component c = chosen.front();
      try {
        const AlsResult step = r1_als(rest, inner);
        c = component_of(step);
        rest -= step.signal;
      } catch (const NumericalError&) {
      }
      chosen.push_back(std::move(c));
    }
    return chosen;
  }
  constexpr double kMaxSubsets = 2000.0;
  double subsets = 1.0;
  for (std::size_t i = 0; i < rank; ++i) subsets = subsets * static_cast<double>(found.size() - i) / static_cast<double>(i + 1);
  if (subsets > kMaxSubsets) return {found.begin(), found.begin() + static_cast<std::ptrdiff_t>(rank)};

  // lexicographic walk over index combinations, first minimum wins
  std::vector<std::size_t> idx(rank);
  for (std::size_t i = 0; i < rank; ++i) idx[i] = i;
  double best = std::numeric_limits<double>::infinity();
  std::vector<Component> trial(rank);
  while (true) {
    for (std::size_t i = 0; i < rank; ++i) trial[i] = found[idx[i]];
    double res = std::numeric_limits<double>::infinity();
    try {
      res = subset_residual(y, trial);
    } catch (const NumericalError&) {
    }
    if (res < best) {
      best = res;
      chosen = trial;
    }
    std::size_t i = rank;
    while (i > 0 && idx[i - 1] == found.size() - rank + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < rank; ++j) idx[j] = idx[j - 1] + 1;
  }
  if (chosen.empty()) return {found.begin(), found.begin() + static_cast<std::ptrdiff_t>(rank)};
  return chosen;
}

// Refit each component on y minus the others until nothing moves.
int remove_residual(const DenseTensor& y, std::vector<Component>& comps, const AlsOptions& inner, int sweeps) {
  int iterations = 0;
  std::vector<DenseTensor> terms;
  for (const auto& c : comps) terms.push_back(outer_term(c, y.dims()));
  for (int s = 0; s < sweeps; ++s) {
    double moved = 0.0;
    for (std::size_t r = 0; r < comps.size(); ++r) {
      DenseTensor rest = y;
      for (std::size_t q = 0; q < comps.size(); ++q) {
        if (q != r) rest -= terms[q];
      }
      AlsResult step;
      try {
        step = r1_als(rest, inner, comps[r].vectors);
      } catch (const NumericalError&) {
        continue;
      }
      iterations += step.report.iterations;
      Component c = component_of(step);
      for (std::size_t k = 0; k < c.vectors.size(); ++k) moved = std::max(moved, sign_distance(c.vectors[k], comps[r].vectors[k]));
      comps[r] = std::move(c);
      terms[r] = std::move(step.signal);
    }
    if (moved <= inner.tol) break;
  }
  return iterations;
}

void finish(AlsResult& res, const DenseTensor& y) {
  res.signal = cp_reconstruct(res.model);
  res.report.residual_trace.assign(1, frobenius_norm(y - res.signal));
}

}  // namespace

AlsResult r1_als_repeat(const DenseTensor& y, std::size_t rank, const RepeatOptions& opts, RandomSource& rng) {
  const auto start = Clock::now();
  check_rank(y, rank, "r1_als_repeat");
  if (opts.restarts_per_component < 1) throw InvalidArgument("r1_als_repeat: restarts must be positive");
  if (opts.refine_sweeps < 0) throw InvalidArgument("r1_als_repeat: refine sweeps must be nonnegative");
  AlsOptions inner = opts.als;
  inner.record_trace = false;

  std::vector<Component> found;
  int iterations = 0;
  bool all_converged = true;
  const int runs = opts.restarts_per_component * static_cast<int>(rank);
  for (int run = 0; run < runs; ++run) {
    std::optional<std::vector<Vector>> init;
    if (run > 0) {
      std::vector<Vector> v;
      for (std::size_t k = 0; k < y.order(); ++k) v.push_back(rng.normal_vector(static_cast<Eigen::Index>(y.dim(k))));
      init = std::move(v);
    }
    const AlsResult r = r1_als(y, inner, init);
    iterations += r.report.iterations;
    all_converged = all_converged && r.report.converged;
    Component c = component_of(r);
    const auto dup = std::find_if(found.begin(), found.end(),
                                  [&](const Component& f) { return same_component(f, c, opts.same_component_tol); });
    if (dup == found.end()) {
      found.push_back(std::move(c));
    } else if (c.weight > dup->weight) {
      *dup = std::move(c);
    }
  }
  std::stable_sort(found.begin(), found.end(), [](const Component& a, const Component& b) { return a.weight > b.weight; });
  std::vector<Component> chosen = select_components(y, found, rank, inner);
  if (opts.refine_sweeps > 0) iterations += remove_residual(y, chosen, inner, opts.refine_sweeps);
  std::stable_sort(chosen.begin(), chosen.end(), [](const Component& a, const Component& b) { return a.weight > b.weight; });

  AlsResult res;
  res.model = assemble(chosen, y.dims());
  res.report.method = "r1-als-repeat";
  res.report.seed = rng.seed();
  res.report.iterations = iterations;
  res.report.converged = all_converged;
  finish(res, y);
  res.report.wall_ms = elapsed_ms(start);
  return res;
}

AlsResult r1_als_deflate(const DenseTensor& y, std::size_t rank, const AlsOptions& opts) {
  const auto start = Clock::now();
  check_rank(y, rank, "r1_als_deflate");
  AlsOptions inner = opts;
  inner.record_trace = false;

  DenseTensor residual = y;
  std::vector<Component> comps;
  int iterations = 0;
  bool all_converged = true;
  for (std::size_t r = 0; r < rank; ++r) {
    AlsResult step = r1_als(residual, inner);
    iterations += step.report.iterations;
    all_converged = all_converged && step.report.converged;
    residual -= step.signal;
    comps.push_back(component_of(step));
  }

  AlsResult res;
  res.model = assemble(comps, y.dims());
  res.report.method = "r1-als-deflate";
  res.report.iterations = iterations;
  res.report.converged = all_converged;
  finish(res, y);
  res.report.wall_ms = elapsed_ms(start);
  return res;
}

std::vector<Matrix> random_factors(const Dims& dims, std::size_t rank, RandomSource& rng) {
  std::vector<Matrix> f;
  for (std::size_t p : dims) {
    Matrix m = rng.normal_matrix(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(rank));
    normalize_columns(m);
    f.push_back(std::move(m));
  }
  return f;
}

AlsResult als_random(const DenseTensor& y, std::size_t rank, const AlsOptions& opts, RandomSource& rng,
                     const CpModel* truth) {
  check_rank(y, rank, "als_random");
  AlsResult res = als(y, random_factors(y.dims(), rank, rng), opts, truth);
  res.report.method = "als-random";
  res.report.seed = rng.seed();
  return res;
}

AlsResult simdiag(const DenseTensor& y, std::size_t rank, const TasdOptions& opts, RandomSource& rng,
                  const CpModel* truth) {
  const auto start = Clock::now();
  check_rank(y, rank, "simdiag");
  AlsResult res;
  res.report.method = "simdiag";
  res.report.seed = rng.seed();
  auto phase = Clock::now();
  const Matrix a0 = simdiag_full(y, rank, rng, opts.retries);
  res.report.phases.emplace_back("diagonalize", elapsed_ms(phase));
  phase = Clock::now();
  auto factors = tasd_part2(y, rank, a0, 0, opts);
  const Vector w = fit_weights(y, factors);
  res.model = make_model(std::move(factors), w);
  res.report.phases.emplace_back("complete", elapsed_ms(phase));
  res.report.converged = true;
  finish(res, y);
  if (truth) res.report.loss_trace.assign(1, loss_matched(res.model, *truth));
  res.report.wall_ms = elapsed_ms(start);
  return res;
}

}  // namespace cpd
