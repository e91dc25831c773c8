#include "cpd/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "cpd/loss.hpp"

namespace cpd {

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> methods{"r1-als",  "als-random",     "als-tasd",     "tasd",
                                                "simdiag", "r1-als-deflate", "r1-als-repeat"};
  return methods;
}

AlsResult run_method(const std::string& method, const DenseTensor& y, std::size_t rank, const MethodOptions& opts,
                     RandomSource& rng, const CpModel* truth) {
  if (method == "r1-als") {
    AlsResult r = r1_als(y, opts.als, std::nullopt, truth);
    r.report.seed = rng.seed();
    return r;
  }
  if (method == "als-random") return als_random(y, rank, opts.als, rng, truth);
  if (method == "als-tasd") {
    TasdOptions t = opts.tasd;
    t.als = opts.als;
    return tasd_als(y, rank, t, rng, truth);
  }
  if (method == "tasd") return tasd(y, rank, opts.tasd, rng, truth);
  if (method == "simdiag") return simdiag(y, rank, opts.tasd, rng, truth);
  if (method == "r1-als-deflate") return r1_als_deflate(y, rank, opts.als);
  if (method == "r1-als-repeat") {
    RepeatOptions r;
    r.als = opts.als;
    r.restarts_per_component = opts.restarts_per_component;
    return r1_als_repeat(y, rank, r, rng);
  }
  throw InvalidArgument("unknown method '" + method + "'");
}

// ---------------------------------------------------------------------------
// config parsing

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Splits on commas outside parentheses, after dropping one pair of
// enclosing brackets.
std::vector<std::string> split_list(const std::string& value, int line) {
  std::string v = trim(value);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') throw ConfigError(line, "unterminated '['");
    v = trim(std::string_view(v).substr(1, v.size() - 2));
  }
  std::vector<std::string> items;
  if (v.empty()) return items;
  int depth = 0;
  std::string cur;
  for (char c : v) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth < 0) throw ConfigError(line, "unbalanced ')'");
    if (c == ',' && depth == 0) {
      items.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (depth != 0) throw ConfigError(line, "unbalanced '('");
  items.push_back(trim(cur));
  for (const auto& it : items) {
    if (it.empty()) throw ConfigError(line, "empty list item");
  }
  return items;
}

double parse_double(const std::string& s, int line) {
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(line, "expected a number, got '" + s + "'");
  }
  return v;
}

template <typename Int>
Int parse_int(const std::string& s, int line) {
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError(line, "expected an integer, got '" + s + "'");
  return v;
}

// Either a literal or linspace(a, b, n).
std::vector<double> parse_number_item(const std::string& item, int line) {
  if (item.rfind("linspace", 0) == 0) {
    const std::string rest = trim(std::string_view(item).substr(8));
    if (rest.size() < 2 || rest.front() != '(' || rest.back() != ')') {
      throw ConfigError(line, "expected linspace(start, stop, count)");
    }
    const auto args = split_list(rest.substr(1, rest.size() - 2), line);
    if (args.size() != 3) throw ConfigError(line, "linspace takes three arguments");
    const double a = parse_double(args[0], line);
    const double b = parse_double(args[1], line);
    const int n = parse_int<int>(args[2], line);
    if (n < 1) throw ConfigError(line, "linspace count must be positive");
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
    return out;
  }
  return {parse_double(item, line)};
}

std::vector<double> parse_numbers(const std::string& value, int line) {
  std::vector<double> out;
  for (const auto& item : split_list(value, line)) {
    const auto v = parse_number_item(item, line);
    out.insert(out.end(), v.begin(), v.end());
  }
  if (out.empty()) throw ConfigError(line, "empty list");
  return out;
}

Dims parse_shape(const std::string& item, int line) {
  Dims dims;
  std::size_t start = 0;
  while (true) {
    const auto x = item.find_first_of("xX", start);
    const std::string part = trim(std::string_view(item).substr(start, x == std::string::npos ? x : x - start));
    const auto p = parse_int<std::size_t>(part, line);
    if (p < 1) throw ConfigError(line, "dimensions must be positive");
    dims.push_back(p);
    if (x == std::string::npos) break;
    start = x + 1;
  }
  if (dims.size() < 2) throw ConfigError(line, "a shape needs at least two modes, e.g. 15x12x10");
  return dims;
}

bool parse_bool(const std::string& s, int line) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(line, "expected true or false, got '" + s + "'");
}

LambdaRule parse_lambdas(const std::string& value, int line) {
  const std::string v = trim(value);
  if (v == "rank") return LambdaRank{};
  if (v.rfind("constant", 0) == 0) {
    const std::string rest = trim(std::string_view(v).substr(8));
    if (rest.size() < 2 || rest.front() != '(' || rest.back() != ')') throw ConfigError(line, "expected constant(value)");
    return LambdaConstant{parse_double(trim(rest.substr(1, rest.size() - 2)), line)};
  }
  return LambdaList{parse_numbers(v, line)};
}

Alignment parse_alignment(const std::string& v, int line) {
  if (v == "auto") return Alignment::Auto;
  if (v == "part2") return Alignment::PartTwo;
  if (v == "exhaustive") return Alignment::Exhaustive;
  throw ConfigError(line, "alignment must be auto, part2 or exhaustive");
}

}  // namespace

SweepConfig parse_config(std::istream& is) {
  SweepConfig cfg;
  std::set<std::string> seen;
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(std::string_view(raw).substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected key = value");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (key.empty()) throw ConfigError(line, "missing key");
    if (value.empty()) throw ConfigError(line, "missing value for '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(line, "duplicate key '" + key + "'");

    if (key == "dims") {
      for (const auto& item : split_list(value, line)) cfg.dims.push_back(parse_shape(item, line));
    } else if (key == "ranks") {
      for (double r : parse_numbers(value, line)) {
        if (r < 1 || r != std::floor(r)) throw ConfigError(line, "ranks must be positive integers");
        cfg.ranks.push_back(static_cast<std::size_t>(r));
      }
    } else if (key == "sigmas") {
      cfg.sigmas = parse_numbers(value, line);
    } else if (key == "alphas") {
      cfg.alphas = parse_numbers(value, line);
    } else if (key == "alpha_scale") {
      cfg.alpha_scale = parse_double(value, line);
    } else if (key == "xis") {
      cfg.xis = parse_numbers(value, line);
    } else if (key == "lambdas") {
      cfg.lambdas = parse_lambdas(value, line);
    } else if (key == "loadings") {
      if (value == "uniform") {
        cfg.loadings = LoadingRule::Uniform;
      } else if (value == "uniform-raw") {
        cfg.loadings = LoadingRule::UniformRaw;
      } else if (value == "coherent") {
        cfg.loadings = LoadingRule::Coherent;
      } else {
        throw ConfigError(line, "loadings must be uniform, uniform-raw or coherent");
      }
    } else if (key == "methods") {
      cfg.methods = split_list(value, line);
      const auto& known = known_methods();
      std::set<std::string> uniq;
      for (const auto& m : cfg.methods) {
        if (std::find(known.begin(), known.end(), m) == known.end()) throw ConfigError(line, "unknown method '" + m + "'");
        if (!uniq.insert(m).second) throw ConfigError(line, "method '" + m + "' listed twice");
      }
    } else if (key == "replicates") {
      cfg.replicates = parse_int<int>(value, line);
    } else if (key == "seed") {
      cfg.seed = parse_int<std::uint64_t>(value, line);
    } else if (key == "jobs") {
      cfg.jobs = parse_int<int>(value, line);
    } else if (key == "max_iters") {
      cfg.method.als.max_iters = parse_int<int>(value, line);
      cfg.method.tasd.rank_one.max_iters = cfg.method.als.max_iters;
    } else if (key == "tol") {
      cfg.method.als.tol = parse_double(value, line);
      cfg.method.tasd.rank_one.tol = cfg.method.als.tol;
    } else if (key == "threshold") {
      cfg.threshold = parse_double(value, line);
    } else if (key == "mode_h") {
      cfg.method.tasd.mode_h = parse_int<std::size_t>(value, line);
    } else if (key == "alignment") {
      cfg.method.tasd.alignment = parse_alignment(value, line);
    } else if (key == "retries") {
      cfg.method.tasd.retries = parse_int<int>(value, line);
    } else if (key == "hooi_max_iters") {
      cfg.method.tasd.hooi_max_iters = parse_int<int>(value, line);
    } else if (key == "hooi_tol") {
      cfg.method.tasd.hooi_tol = parse_double(value, line);
    } else if (key == "exhaustive_budget") {
      cfg.method.tasd.exhaustive_budget = parse_int<std::uint64_t>(value, line);
    } else if (key == "restarts") {
      cfg.method.restarts_per_component = parse_int<int>(value, line);
    } else if (key == "timing") {
      cfg.timing = parse_bool(value, line);
    } else {
      throw ConfigError(line, "unknown key '" + key + "'");
    }
  }
  return cfg;
}

SweepConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path.string());
  return parse_config(is);
}

void SweepConfig::validate(SweepMode mode) const {
  if (dims.empty()) throw ConfigError(0, "dims is required");
  if (ranks.empty()) throw ConfigError(0, "ranks is required");
  if (methods.empty()) throw ConfigError(0, "methods is required");
  if (replicates < 1) throw ConfigError(0, "replicates must be at least 1");
  if (jobs < 1) throw ConfigError(0, "jobs must be at least 1");
  if (xis.empty()) throw ConfigError(0, "xis must not be empty");
  if (!(threshold > 0.0)) throw ConfigError(0, "threshold must be positive");
  if (method.als.max_iters < 1 || !(method.als.tol >= 0.0)) throw ConfigError(0, "invalid max_iters or tol");
  if (method.restarts_per_component < 1) throw ConfigError(0, "restarts must be at least 1");
  if (mode == SweepMode::Sigma) {
    if (sigmas.empty()) throw ConfigError(0, "sigmas is required");
    for (double s : sigmas) {
      if (s < 0.0) throw ConfigError(0, "sigmas must be nonnegative");
    }
  } else {
    if (alphas.empty()) throw ConfigError(0, "alphas is required");
    if (!(alpha_scale > 0.0)) throw ConfigError(0, "alpha_scale must be positive");
    for (const auto& d : dims) {
      if (std::adjacent_find(d.begin(), d.end(), std::not_equal_to<>()) != d.end()) {
        throw ConfigError(0, "alpha sweeps need cubic dims, got " + format_dims(d));
      }
    }
  }
  for (const auto& d : dims) {
    if (method.tasd.mode_h + 1 >= d.size()) throw ConfigError(0, "mode_h must be below the last mode for " + format_dims(d));
  }
  for (std::size_t r : ranks) {
    if (const auto* l = std::get_if<LambdaList>(&lambdas); l && l->values.size() != r) {
      throw ConfigError(0, "lambdas lists " + std::to_string(l->values.size()) + " values but rank " +
                               std::to_string(r) + " is in the grid");
    }
  }
  if (loadings == LoadingRule::Coherent) {
    for (double xi : xis) {
      if (!(xi >= 0.0 && xi < 1.0)) throw ConfigError(0, "xis must lie in [0, 1)");
    }
    for (const auto& d : dims) {
      for (std::size_t r : ranks) {
        if (r > *std::min_element(d.begin(), d.end())) throw ConfigError(0, "coherent loadings need rank <= every dimension");
      }
    }
  } else if (xis.size() != 1 || xis.front() != 0.0) {
    throw ConfigError(0, "xis only applies to coherent loadings");
  }
}

std::vector<GridPoint> expand_grid(const SweepConfig& cfg, SweepMode mode) {
  std::vector<GridPoint> grid;
  const auto& levels = mode == SweepMode::Sigma ? cfg.sigmas : cfg.alphas;
  for (const auto& d : cfg.dims) {
    for (std::size_t r : cfg.ranks) {
      for (double level : levels) {
        for (double xi : cfg.xis) {
          GridPoint g;
          g.dims = d;
          g.rank = r;
          g.xi = xi;
          if (mode == SweepMode::Sigma) {
            g.sigma = level;
          } else {
            g.alpha = level;
            g.sigma = cfg.alpha_scale * std::pow(static_cast<double>(d.front()), -level);
          }
          grid.push_back(std::move(g));
        }
      }
    }
  }
  return grid;
}

namespace {

RandomSource replicate_source(std::uint64_t seed, std::size_t grid_index, int replicate) {
  return RandomSource(seed, (static_cast<std::uint64_t>(grid_index) << 32) | static_cast<std::uint32_t>(replicate));
}

// als-tasd shares the stream of tasd so its initialization is exactly the
// tasd estimate of the same replicate.
std::uint64_t method_tag(const std::string& method) {
  const auto& known = known_methods();
  const std::string& key = method == "als-tasd" ? std::string("tasd") : method;
  return 16 + static_cast<std::uint64_t>(std::find(known.begin(), known.end(), key) - known.begin());
}

}  // namespace

Instance make_instance(const SweepConfig& cfg, const GridPoint& point, std::size_t grid_index, int replicate) {
  const RandomSource base = replicate_source(cfg.seed, grid_index, replicate);
  ScenarioSpec spec;
  spec.dims = point.dims;
  spec.rank = point.rank;
  spec.lambdas = cfg.lambdas;
  spec.loadings = cfg.loadings;
  spec.xi = point.xi;
  spec.sigma = point.sigma;
  spec.validate();
  RandomSource model_rng = base.derive(1);
  RandomSource noise_rng = base.derive(2);
  Instance inst;
  inst.truth = gen_model(spec, model_rng);
  inst.y = add_noise(cp_reconstruct(inst.truth), point.sigma, noise_rng);
  return inst;
}

std::vector<ReportRow> run_sweep(const SweepConfig& cfg, SweepMode mode) {
  cfg.validate(mode);
  const auto grid = expand_grid(cfg, mode);
  const std::size_t M = cfg.methods.size();
  const auto reps = static_cast<std::size_t>(cfg.replicates);
  const std::size_t tasks = grid.size() * reps;
  // slot (g, m, r) in final order
  std::vector<ReportRow> rows(tasks * M);

  auto run_task = [&](std::size_t task) {
    const std::size_t g = task / reps;
    const int rep = static_cast<int>(task % reps);
    const GridPoint& point = grid[g];
    const Instance inst = make_instance(cfg, point, g, rep);
    const RandomSource base = replicate_source(cfg.seed, g, rep);
    for (std::size_t m = 0; m < M; ++m) {
      ReportRow& row = rows[(g * M + m) * reps + static_cast<std::size_t>(rep)];
      row.seed = cfg.seed;
      row.replicate = rep;
      row.method = cfg.methods[m];
      row.dims = point.dims;
      row.rank = point.rank;
      row.sigma = point.sigma;
      row.xi = point.xi;
      row.alpha = point.alpha;
      RandomSource rng = base.derive(method_tag(row.method));
      try {
        const AlsResult res = run_method(row.method, inst.y, point.rank, cfg.method, rng, &inst.truth);
        const double loss = loss_matched(res.model, inst.truth);
        if (!std::isfinite(loss)) throw NumericalError("non-finite loss");
        row.loss = loss;
        row.iters = res.report.iterations;
        if (!res.report.loss_trace.empty()) row.iters_to_threshold = res.report.iterations_to(cfg.threshold);
        if (cfg.timing) row.runtime_ms = res.report.wall_ms;
      } catch (const std::exception&) {
        row.failed = true;
      }
    }
  };

  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), tasks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      try {
        run_task(t);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = tasks;
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::string format_dims(const Dims& dims) {
  std::string s;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(dims[i]);
  }
  return s;
}

void write_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.seed << ',' << r.replicate << ',' << r.method << ',' << r.dims.size() << ',' << format_dims(r.dims) << ','
       << r.rank << ',' << format_double(r.sigma) << ',' << format_double(r.xi) << ',';
    if (r.alpha) os << format_double(*r.alpha);
    os << ',';
    if (r.loss) os << format_double(*r.loss);
    os << ',';
    if (r.iters_to_threshold) os << *r.iters_to_threshold;
    os << ',' << r.iters << ',';
    if (r.runtime_ms) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", *r.runtime_ms);
      os << buf;
    }
    os << ',' << (r.failed ? 1 : 0) << '\n';
  }
}

}  // namespace cpd
