#include "cpd/tasd.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "cpd/error.hpp"
#include "cpd/linalg.hpp"
#include "cpd/loss.hpp"

namespace cpd {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

constexpr double kEigenGapTol = 1e-10;
constexpr double kRealPartTol = 1e-8;

// Eigenvectors of m1 pinv(m2) for the `rank` largest eigenvalues, or nullopt
// when two of those eigenvalues nearly coincide.
std::optional<Matrix> diagonalize(const Matrix& m1, const Matrix& m2, std::size_t rank) {
  const Matrix m = m1 * pinv(m2);
  const EigenPairs ep = eig(m);
  const auto R = static_cast<Eigen::Index>(rank);
  const double top = std::abs(ep.values(0));
  for (Eigen::Index i = 0; i < R; ++i) {
    for (Eigen::Index j = i + 1; j < R; ++j) {
      if (std::abs(ep.values(i) - ep.values(j)) < kEigenGapTol * top) return std::nullopt;
    }
  }
  Matrix v(m.rows(), R);
  for (Eigen::Index r = 0; r < R; ++r) {
    Vector re = ep.vectors.col(r).real();
    if (re.norm() < kRealPartTol) re = ep.vectors.col(r).imag();
    const double n = re.norm();
    if (n == 0.0) return std::nullopt;
    v.col(r) = re / n;
  }
  return v;
}

std::size_t partner_of(std::size_t mode, std::size_t order) { return mode + 1 < order ? mode + 1 : mode - 1; }

void check_tasd_input(const DenseTensor& y, std::size_t rank) {
  if (y.order() < 3) throw InvalidArgument("TASD requires a tensor of order at least 3");
  if (rank < 1) throw InvalidArgument("TASD: rank must be at least 1");
  for (std::size_t k = 0; k < y.order(); ++k) {
    if (rank > y.dim(k)) {
      throw InvalidArgument("TASD: rank " + std::to_string(rank) + " exceeds dimension of mode " + std::to_string(k));
    }
  }
  if (!y.all_finite()) throw InvalidArgument("TASD: non-finite values");
}

TuckerModel rank_r_tucker(const DenseTensor& y, std::size_t rank, const TasdOptions& opts) {
  TuckerOptions t;
  t.ranks.assign(y.order(), rank);
  t.max_iters = opts.hooi_max_iters;
  t.tol = opts.hooi_tol;
  return hooi(y, t);
}

void record_init(RunReport& rep, const DenseTensor& y, const CpModel& m, const CpModel* truth) {
  rep.residual_trace.push_back(frobenius_norm(y - cp_reconstruct(m)));
  if (truth) rep.loss_trace.push_back(loss_matched(m, *truth));
}

}  // namespace

CpModel make_model(std::vector<Matrix> factors, const Vector& weights) {
  CpModel m;
  m.lambdas = weights.cwiseAbs();
  for (Eigen::Index r = 0; r < weights.size(); ++r) {
    if (weights(r) < 0.0) factors[0].col(r) = -factors[0].col(r);
  }
  m.factors = std::move(factors);
  return m;
}

Matrix simdiag_full(const DenseTensor& y, std::size_t rank, RandomSource& rng, int retries) {
  check_tasd_input(y, rank);
  if (retries < 1) throw InvalidArgument("simdiag_full: retries must be at least 1");
  std::vector<std::size_t> modes;
  for (std::size_t k = 2; k < y.order(); ++k) modes.push_back(k);
  for (int attempt = 0; attempt < retries; ++attempt) {
    std::vector<Vector> w1;
    std::vector<Vector> w2;
    for (auto k : modes) {
      w1.push_back(rng.normal_vector(static_cast<Eigen::Index>(y.dim(k))));
      w2.push_back(rng.normal_vector(static_cast<Eigen::Index>(y.dim(k))));
    }
    const Matrix m1 = unfold(contract_vectors(y, modes, w1), 0);
    const Matrix m2 = unfold(contract_vectors(y, modes, w2), 0);
    if (auto v = diagonalize(m1, m2, rank)) return *v;
  }
  throw NumericalError("simdiag: eigenvalues coincide for every probe draw");
}

Matrix tasd_part1_from_tucker(const TuckerModel& tucker, std::size_t mode, std::size_t partner,
                              RandomSource& rng, int retries) {
  const DenseTensor& core = tucker.core;
  const std::size_t d = core.order();
  if (mode >= d || partner >= d || mode == partner) throw InvalidArgument("tasd_part1: invalid mode pair");
  if (retries < 1) throw InvalidArgument("tasd_part1: retries must be at least 1");
  const std::size_t rank = core.dim(mode);

  std::vector<std::size_t> modes;
  for (std::size_t k = 0; k < d; ++k) {
    if (k != mode && k != partner) modes.push_back(k);
  }
  const std::size_t row_pos = mode < partner ? 0 : 1;
  for (int attempt = 0; attempt < retries; ++attempt) {
    std::vector<Vector> w1;
    std::vector<Vector> w2;
    for (auto k : modes) {
      w1.push_back(rng.normal_vector(static_cast<Eigen::Index>(core.dim(k))));
      w2.push_back(rng.normal_vector(static_cast<Eigen::Index>(core.dim(k))));
    }
    const Matrix m1 = unfold(contract_vectors(core, modes, w1), row_pos);
    const Matrix m2 = unfold(contract_vectors(core, modes, w2), row_pos);
    if (auto v = diagonalize(m1, m2, rank)) {
      Matrix a = tucker.factors[mode] * (*v);
      normalize_columns(a);
      return a;
    }
  }
  throw NumericalError("tasd_part1: eigenvalues coincide for every probe draw");
}

Matrix tasd_part1(const DenseTensor& y, std::size_t rank, const TasdOptions& opts, RandomSource& rng) {
  check_tasd_input(y, rank);
  if (opts.mode_h + 1 >= y.order()) throw InvalidArgument("tasd_part1: mode h must have a successor mode");
  const TuckerModel tucker = rank_r_tucker(y, rank, opts);
  return tasd_part1_from_tucker(tucker, opts.mode_h, opts.mode_h + 1, rng, opts.retries);
}

std::vector<Matrix> tasd_part2(const DenseTensor& y, std::size_t rank, const Matrix& a_h, std::size_t h,
                               const TasdOptions& opts) {
  if (h >= y.order()) throw InvalidArgument("tasd_part2: mode out of range");
  if (y.order() < 2) throw InvalidArgument("tasd_part2: tensor order must be at least 2");
  const auto R = static_cast<Eigen::Index>(rank);
  if (a_h.rows() != static_cast<Eigen::Index>(y.dim(h)) || a_h.cols() != R) {
    throw InvalidArgument("tasd_part2: loading matrix has wrong shape");
  }
  if (numerical_rank(a_h) < R) throw NumericalError("tasd_part2: loading matrix is rank deficient");

  const Matrix rows = pinv(a_h) * unfold(y, h);

  Dims folded_dims{1};
  Dims other_dims;
  for (std::size_t k = 0; k < y.order(); ++k) {
    if (k == h) continue;
    folded_dims.push_back(y.dim(k));
    other_dims.push_back(y.dim(k));
  }

  std::vector<Matrix> out(y.order());
  for (std::size_t k = 0; k < y.order(); ++k) out[k] = Matrix(static_cast<Eigen::Index>(y.dim(k)), R);
  out[h] = a_h;
  normalize_columns(out[h]);

  for (Eigen::Index r = 0; r < R; ++r) {
    // A leading singleton mode makes fold() use the unfolding column order.
    const DenseTensor shaped = fold(rows.row(r), 0, folded_dims);
    const std::span<const double> vals = shaped.values();
    const DenseTensor t(other_dims, std::vector<double>(vals.begin(), vals.end()));
    if (t.order() == 1) {
      const std::size_t k = h == 0 ? 1 : 0;
      Vector v = Eigen::Map<const Vector>(t.data(), static_cast<Eigen::Index>(t.size()));
      const double n = v.norm();
      if (n == 0.0) throw NumericalError("tasd_part2: zero row in least-squares split");
      out[k].col(r) = v / n;
      continue;
    }
    const AlsResult fit = r1_als(t, opts.rank_one);
    std::size_t j = 0;
    for (std::size_t k = 0; k < y.order(); ++k) {
      if (k == h) continue;
      out[k].col(r) = fit.model.factors[j++].col(0);
    }
  }
  return out;
}

std::uint64_t permutation_combinations(std::size_t rank, std::size_t order) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t fact = 1;
  for (std::size_t i = 2; i <= rank; ++i) {
    if (fact > kMax / i) return kMax;
    fact *= i;
  }
  std::uint64_t total = 1;
  for (std::size_t k = 1; k < order; ++k) {
    if (fact != 0 && total > kMax / fact) return kMax;
    total *= fact;
  }
  return total;
}

AlignResult align_exhaustive(const DenseTensor& y, std::span<const Matrix> factors, std::uint64_t budget) {
  const std::size_t d = factors.size();
  if (d != y.order() || d < 2) throw InvalidArgument("align_exhaustive: one factor per mode required");
  const auto R = factors.front().cols();
  for (std::size_t k = 0; k < d; ++k) {
    if (factors[k].cols() != R || factors[k].rows() != static_cast<Eigen::Index>(y.dim(k))) {
      throw InvalidArgument("align_exhaustive: factor " + std::to_string(k) + " has wrong shape");
    }
  }
  const auto combos = permutation_combinations(static_cast<std::size_t>(R), d);
  if (combos > budget) {
    throw InvalidArgument("align_exhaustive: " + std::to_string(combos) + " permutation combinations exceed budget " +
                          std::to_string(budget));
  }

  const double yy = inner(y, y);
  std::vector<std::vector<std::size_t>> perms(d, std::vector<std::size_t>(static_cast<std::size_t>(R)));
  for (auto& p : perms) std::iota(p.begin(), p.end(), std::size_t{0});

  std::vector<Matrix> permuted(factors.begin(), factors.end());
  auto apply = [&](std::size_t k) {
    for (Eigen::Index r = 0; r < R; ++r) permuted[k].col(r) = factors[k].col(static_cast<Eigen::Index>(perms[k][static_cast<std::size_t>(r)]));
  };

  double best = std::numeric_limits<double>::infinity();
  std::vector<std::vector<std::size_t>> best_perms = perms;
  while (true) {
    for (std::size_t k = 1; k < d; ++k) apply(k);
    const Matrix g = hadamard_gram(permuted, d);
    const Vector rhs = project_rank_one(y, permuted);
    const Vector w = lstsq(g, rhs);
    const double res2 = yy - 2.0 * w.dot(rhs) + w.dot(g * w);
    const double res = std::sqrt(std::max(res2, 0.0));
    if (res < best) {
      best = res;
      best_perms = perms;
    }
    // Advance the tuple (perms[1], ..., perms[d-1]) lexicographically.
    std::size_t k = d;
    while (k-- > 1) {
      if (std::next_permutation(perms[k].begin(), perms[k].end())) break;
    }
    if (k == 0 || k > d) break;
  }

  AlignResult out;
  out.perms = best_perms;
  perms = best_perms;
  for (std::size_t k = 1; k < d; ++k) apply(k);
  const Vector w = fit_weights(y, permuted);
  out.model = make_model(permuted, w);
  out.residual = frobenius_norm(y - cp_reconstruct(out.model));
  return out;
}

AlsResult tasd(const DenseTensor& y, std::size_t rank, const TasdOptions& opts, RandomSource& rng,
               const CpModel* truth) {
  const auto start = Clock::now();
  check_tasd_input(y, rank);
  if (opts.mode_h + 1 >= y.order()) throw InvalidArgument("tasd: mode h must have a successor mode");

  AlsResult res;
  res.report.method = "tasd";
  res.report.seed = rng.seed();

  auto phase = Clock::now();
  const TuckerModel tucker = rank_r_tucker(y, rank, opts);
  res.report.phases.emplace_back("tucker", elapsed_ms(phase));

  phase = Clock::now();
  const std::size_t h = opts.mode_h;
  const Matrix a_h = tasd_part1_from_tucker(tucker, h, partner_of(h, y.order()), rng, opts.retries);

  bool exhaustive = opts.alignment == Alignment::Exhaustive;
  if (opts.alignment == Alignment::Auto) {
    exhaustive = permutation_combinations(rank, y.order()) <= opts.exhaustive_budget;
  }
  if (exhaustive) {
    std::vector<Matrix> all(y.order());
    all[h] = a_h;
    for (std::size_t k = 0; k < y.order(); ++k) {
      if (k != h) all[k] = tasd_part1_from_tucker(tucker, k, partner_of(k, y.order()), rng, opts.retries);
    }
    res.report.phases.emplace_back("diagonalize", elapsed_ms(phase));
    phase = Clock::now();
    AlignResult al = align_exhaustive(y, all, opts.exhaustive_budget);
    res.model = std::move(al.model);
  } else {
    res.report.phases.emplace_back("diagonalize", elapsed_ms(phase));
    phase = Clock::now();
    auto factors = tasd_part2(y, rank, a_h, h, opts);
    const Vector w = fit_weights(y, factors);
    res.model = make_model(std::move(factors), w);
  }
  res.report.phases.emplace_back("align", elapsed_ms(phase));

  res.signal = cp_reconstruct(res.model);
  record_init(res.report, y, res.model, truth);
  res.report.converged = true;
  res.report.wall_ms = elapsed_ms(start);
  return res;
}

AlsResult tasd_als(const DenseTensor& y, std::size_t rank, const TasdOptions& opts, RandomSource& rng,
                   const CpModel* truth) {
  const auto start = Clock::now();
  AlsResult init = tasd(y, rank, opts, rng, truth);
  auto phase = Clock::now();
  AlsResult res = als(y, init.model.factors, opts.als, truth);
  res.report.method = "als-tasd";
  res.report.seed = rng.seed();
  res.report.phases = init.report.phases;
  res.report.phases.emplace_back("als", elapsed_ms(phase));
  res.report.wall_ms = elapsed_ms(start);
  return res;
}

}  // namespace cpd
