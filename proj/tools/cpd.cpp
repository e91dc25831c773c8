#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cpd/bench.hpp"
#include "cpd/cpdt_io.hpp"

namespace fs = std::filesystem;
using namespace cpd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitFailure = 2;

struct DecomposeArgs {
  std::string input;
  std::string method = "als-tasd";
  std::size_t rank = 1;
  int max_iters = 100;
  double tol = 1e-8;
  std::size_t mode_h = 0;
  std::string alignment = "auto";
  std::uint64_t seed = 0;
  std::string out;
};

struct SweepArgs {
  std::string config;
  std::string out;
  int jobs = 0;
  std::optional<std::uint64_t> seed;
  bool timing = false;
};

struct GenerateArgs {
  std::string dims = "15x12x10";
  std::size_t rank = 3;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::string loadings = "uniform";
  double xi = 0.0;
  std::string out;
  std::string truth_dir;
};

struct ReconstructArgs {
  std::string model;
  std::string out;
};

void write_model(const fs::path& dir, const CpModel& m) {
  fs::create_directories(dir);
  for (std::size_t k = 0; k < m.factors.size(); ++k) {
    write_cpdt(dir / ("factor_" + std::to_string(k) + ".cpdt"), matrix_to_tensor(m.factors[k]));
  }
  DenseTensor lam({static_cast<std::size_t>(m.lambdas.size())});
  for (Eigen::Index r = 0; r < m.lambdas.size(); ++r) lam[static_cast<std::size_t>(r)] = m.lambdas(r);
  write_cpdt(dir / "lambda.cpdt", lam);
}

CpModel read_model(const fs::path& dir) {
  CpModel m;
  const DenseTensor lam = read_cpdt(dir / "lambda.cpdt");
  if (lam.order() != 1) throw IoError("lambda.cpdt must hold an order-1 tensor");
  m.lambdas = Eigen::Map<const Vector>(lam.data(), static_cast<Eigen::Index>(lam.size()));
  for (std::size_t k = 0; fs::exists(dir / ("factor_" + std::to_string(k) + ".cpdt")); ++k) {
    m.factors.push_back(tensor_to_matrix(read_cpdt(dir / ("factor_" + std::to_string(k) + ".cpdt"))));
  }
  if (m.factors.empty()) throw IoError("no factor files in " + dir.string());
  try {
    m.validate(1e-6);
  } catch (const std::exception& e) {
    throw IoError(std::string("inconsistent model files: ") + e.what());
  }
  return m;
}

Alignment alignment_of(const std::string& s) {
  if (s == "auto") return Alignment::Auto;
  if (s == "part2") return Alignment::PartTwo;
  if (s == "exhaustive") return Alignment::Exhaustive;
  throw InvalidArgument("alignment must be auto, part2 or exhaustive");
}

int cmd_decompose(const DecomposeArgs& a) {
  DenseTensor y;
  try {
    y = read_cpdt(fs::path(a.input));
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  MethodOptions opts;
  opts.als.max_iters = a.max_iters;
  opts.als.tol = a.tol;
  opts.tasd.mode_h = a.mode_h;
  opts.tasd.rank_one = opts.als;
  AlsResult res;
  try {
    opts.tasd.alignment = alignment_of(a.alignment);
    RandomSource rng(a.seed, 0);
    res = run_method(a.method, y, a.rank, opts, rng);
  } catch (const std::exception& e) {
    std::cerr << "error: " << a.method << " failed: " << e.what() << '\n';
    return kExitFailure;
  }
  try {
    write_model(fs::path(a.out), res.model);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  const double resid = frobenius_norm(y - res.signal);
  const double ynorm = frobenius_norm(y);
  std::cout << "method=" << a.method << " rank=" << res.model.rank() << " residual=" << format_double(resid)
            << " relative_residual=" << format_double(ynorm > 0 ? resid / ynorm : 0.0)
            << " iterations=" << res.report.iterations << " converged=" << (res.report.converged ? 1 : 0) << '\n';
  return kExitOk;
}

int cmd_sweep(const SweepArgs& a, SweepMode mode) {
  SweepConfig cfg;
  try {
    cfg = parse_config_file(fs::path(a.config));
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  if (a.jobs > 0) cfg.jobs = a.jobs;
  if (a.seed) cfg.seed = *a.seed;
  if (a.timing) cfg.timing = true;
  std::vector<ReportRow> rows;
  try {
    rows = run_sweep(cfg, mode);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  std::ofstream os(a.out, std::ios::binary);
  if (!os) {
    std::cerr << "error: cannot open " << a.out << " for writing\n";
    return kExitIo;
  }
  write_csv(os, rows);
  if (!os.flush()) {
    std::cerr << "error: write to " << a.out << " failed\n";
    return kExitIo;
  }
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.failed ? 1 : 0;
  std::cout << "rows=" << rows.size() << " failed=" << failed << " out=" << a.out << '\n';
  return kExitOk;
}

int cmd_generate(const GenerateArgs& a) {
  CpModel truth;
  DenseTensor y;
  try {
    std::istringstream cfg_text("dims = " + a.dims + "\n");
    ScenarioSpec spec;
    spec.dims = parse_config(cfg_text).dims.at(0);
    spec.rank = a.rank;
    spec.sigma = a.sigma;
    spec.xi = a.xi;
    if (a.loadings == "uniform") {
      spec.loadings = LoadingRule::Uniform;
    } else if (a.loadings == "uniform-raw") {
      spec.loadings = LoadingRule::UniformRaw;
    } else if (a.loadings == "coherent") {
      spec.loadings = LoadingRule::Coherent;
    } else {
      throw InvalidArgument("loadings must be uniform, uniform-raw or coherent");
    }
    spec.validate();
    RandomSource rng(a.seed, 0);
    RandomSource model_rng = rng.derive(1);
    RandomSource noise_rng = rng.derive(2);
    truth = gen_model(spec, model_rng);
    y = add_noise(cp_reconstruct(truth), a.sigma, noise_rng);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  try {
    write_cpdt(fs::path(a.out), y);
    if (!a.truth_dir.empty()) write_model(fs::path(a.truth_dir), truth);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}

int cmd_reconstruct(const ReconstructArgs& a) {
  try {
    write_cpdt(fs::path(a.out), cp_reconstruct(read_model(fs::path(a.model))));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dense CP tensor decomposition and simulation harness"};
  app.require_subcommand(1);

  DecomposeArgs dec;
  auto* d = app.add_subcommand("decompose", "Fit a CP model to a CPDT tensor file");
  d->add_option("--input", dec.input, "Input tensor (CPDT)")->required();
  d->add_option("--method", dec.method, "Method tag")
      ->check(CLI::IsMember(known_methods()));
  d->add_option("--rank", dec.rank, "CP rank")->required()->check(CLI::PositiveNumber);
  d->add_option("--max-iters", dec.max_iters, "ALS sweep limit")->check(CLI::PositiveNumber);
  d->add_option("--tol", dec.tol, "ALS column-change tolerance")->check(CLI::NonNegativeNumber);
  d->add_option("--mode-h", dec.mode_h, "Mode used for the diagonalization (zero-based, not the last mode)");
  d->add_option("--alignment", dec.alignment, "auto, part2 or exhaustive");
  d->add_option("--seed", dec.seed, "Seed for randomized steps");
  d->add_option("--out", dec.out, "Output directory")->required();

  SweepArgs sim;
  auto* s = app.add_subcommand("simulate", "Run a Monte-Carlo sweep over a sigma grid");
  s->add_option("--config", sim.config, "Sweep config file")->required();
  s->add_option("--out", sim.out, "CSV report path")->required();
  s->add_option("--jobs", sim.jobs, "Worker threads (overrides config)")->check(CLI::PositiveNumber);
  s->add_option("--seed", sim.seed, "Master seed (overrides config)");
  s->add_flag("--timing", sim.timing, "Fill the runtime_ms column");

  SweepArgs alpha;
  auto* sa = app.add_subcommand("sweep-alpha", "Run a sweep with sigma = alpha_scale * p^-alpha");
  sa->add_option("--config", alpha.config, "Sweep config file")->required();
  sa->add_option("--out", alpha.out, "CSV report path")->required();
  sa->add_option("--jobs", alpha.jobs, "Worker threads (overrides config)")->check(CLI::PositiveNumber);
  sa->add_option("--seed", alpha.seed, "Master seed (overrides config)");
  sa->add_flag("--timing", alpha.timing, "Fill the runtime_ms column");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic low-rank tensor plus noise");
  g->add_option("--dims", gen.dims, "Shape, e.g. 15x12x10");
  g->add_option("--rank", gen.rank, "CP rank")->check(CLI::PositiveNumber);
  g->add_option("--sigma", gen.sigma, "Noise level")->check(CLI::NonNegativeNumber);
  g->add_option("--seed", gen.seed, "Seed");
  g->add_option("--loadings", gen.loadings, "uniform, uniform-raw or coherent");
  g->add_option("--xi", gen.xi, "Coherence for coherent loadings");
  g->add_option("--truth", gen.truth_dir, "Also write the true model to this directory");
  g->add_option("--out", gen.out, "Output tensor (CPDT)")->required();

  ReconstructArgs rec;
  auto* r = app.add_subcommand("reconstruct", "Rebuild the full tensor from a model directory");
  r->add_option("--model", rec.model, "Directory written by decompose")->required();
  r->add_option("--out", rec.out, "Output tensor (CPDT)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (*d) return cmd_decompose(dec);
  if (*s) return cmd_sweep(sim, SweepMode::Sigma);
  if (*sa) return cmd_sweep(alpha, SweepMode::Alpha);
  if (*g) return cmd_generate(gen);
  if (*r) return cmd_reconstruct(rec);
  return kExitFailure;
}
