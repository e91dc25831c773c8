#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cpd/baselines.hpp"
#include "cpd/error.hpp"
#include "cpd/simgen.hpp"
#include "cpd/tasd.hpp"

namespace cpd {

/// Method tags accepted by run_method and the sweep config, in canonical order.
const std::vector<std::string>& known_methods();

struct MethodOptions {
  AlsOptions als{};
  TasdOptions tasd{};
  int restarts_per_component = 10;
};

/// Runs one method by tag. `truth` only feeds the loss trace.
AlsResult run_method(const std::string& method, const DenseTensor& y, std::size_t rank, const MethodOptions& opts,
                     RandomSource& rng, const CpModel* truth = nullptr);

class ConfigError : public InvalidArgument {
 public:
  ConfigError(int line, const std::string& what)
      : InvalidArgument(line > 0 ? "config line " + std::to_string(line) + ": " + what : "config: " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

enum class SweepMode {
  /// Grid over the listed sigmas.
  Sigma,
  /// sigma = alpha_scale * p^(-alpha) for cubic dims.
  Alpha,
};

struct SweepConfig {
  std::vector<Dims> dims;
  std::vector<std::size_t> ranks;
  std::vector<double> sigmas;
  std::vector<double> alphas;
  double alpha_scale = 10.0;
  std::vector<double> xis{0.0};
  LambdaRule lambdas = LambdaRank{};
  LoadingRule loadings = LoadingRule::Uniform;
  std::vector<std::string> methods;
  int replicates = 1;
  std::uint64_t seed = 0;
  int jobs = 1;
  MethodOptions method{};
  /// Loss bar for the iterations-to-threshold column.
  double threshold = 0.05;
  /// Fill the runtime_ms column. Off by default so reports are reproducible
  /// byte for byte.
  bool timing = false;

  /// Throws ConfigError when the config cannot describe a sweep in `mode`.
  void validate(SweepMode mode) const;
};

/// Parses the key = value format documented in docs/config.md.
SweepConfig parse_config(std::istream& is);
SweepConfig parse_config_file(const std::filesystem::path& path);

struct GridPoint {
  Dims dims;
  std::size_t rank = 1;
  double sigma = 0.0;
  double xi = 0.0;
  std::optional<double> alpha;
};

/// Grid in report order: dims, then rank, then sigma (or alpha), then xi.
std::vector<GridPoint> expand_grid(const SweepConfig& cfg, SweepMode mode);

struct ReportRow {
  std::uint64_t seed = 0;
  int replicate = 0;
  std::string method;
  Dims dims;
  std::size_t rank = 0;
  double sigma = 0.0;
  double xi = 0.0;
  std::optional<double> alpha;
  std::optional<double> loss;
  std::optional<int> iters_to_threshold;
  int iters = 0;
  std::optional<double> runtime_ms;
  bool failed = false;
};

/// Data for replicate r of grid point g; identical for every method and
/// independent of scheduling.
struct Instance {
  CpModel truth;
  DenseTensor y;
};
Instance make_instance(const SweepConfig& cfg, const GridPoint& point, std::size_t grid_index, int replicate);

/// Runs every (grid point, replicate, method) and returns rows sorted by
/// (grid point, method as listed, replicate).
std::vector<ReportRow> run_sweep(const SweepConfig& cfg, SweepMode mode);

inline constexpr const char* kCsvHeader =
    "seed,replicate,method,d,dims,R,sigma,xi,alpha,loss,iters_to_005,iters,runtime_ms,failed";

void write_csv(std::ostream& os, const std::vector<ReportRow>& rows);

/// Shortest round-trip decimal form.
std::string format_double(double v);
std::string format_dims(const Dims& dims);

}  // namespace cpd
