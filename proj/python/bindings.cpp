#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cpd/bench.hpp"
#include "cpd/cpdt_io.hpp"
#include "cpd/loss.hpp"

namespace py = pybind11;
using namespace cpd;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

DenseTensor to_tensor(const Array& a) {
  if (a.ndim() < 1) throw InvalidArgument("expected an array with at least one axis");
  Dims dims(a.shape(), a.shape() + a.ndim());
  return DenseTensor(std::move(dims), std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const DenseTensor& t) {
  std::vector<py::ssize_t> shape(t.dims().begin(), t.dims().end());
  Array out(shape);
  std::copy(t.data(), t.data() + t.size(), out.mutable_data());
  return out;
}

CpModel to_model(const Vector& lambdas, const std::vector<Matrix>& factors) {
  CpModel m{lambdas, factors};
  m.validate(1e-6);
  return m;
}

Alignment alignment_of(const std::string& s) {
  if (s == "auto") return Alignment::Auto;
  if (s == "part2") return Alignment::PartTwo;
  if (s == "exhaustive") return Alignment::Exhaustive;
  throw InvalidArgument("alignment must be auto, part2 or exhaustive");
}

LoadingRule loadings_of(const std::string& s) {
  if (s == "uniform") return LoadingRule::Uniform;
  if (s == "uniform-raw") return LoadingRule::UniformRaw;
  if (s == "coherent") return LoadingRule::Coherent;
  throw InvalidArgument("loadings must be uniform, uniform-raw or coherent");
}

py::dict decompose(const Array& y_in, std::size_t rank, const std::string& method, int max_iters, double tol,
                   std::size_t mode_h, const std::string& alignment, std::uint64_t seed) {
  const DenseTensor y = to_tensor(y_in);
  MethodOptions opts;
  opts.als.max_iters = max_iters;
  opts.als.tol = tol;
  opts.tasd.mode_h = mode_h;
  opts.tasd.rank_one = opts.als;
  opts.tasd.alignment = alignment_of(alignment);
  AlsResult res;
  {
    py::gil_scoped_release nogil;
    RandomSource rng(seed, 0);
    res = run_method(method, y, rank, opts, rng);
  }
  py::dict out;
  out["lambdas"] = res.model.lambdas;
  out["factors"] = res.model.factors;
  out["iterations"] = res.report.iterations;
  out["converged"] = res.report.converged;
  out["residual"] = frobenius_norm(y - res.signal);
  out["method"] = res.report.method;
  return out;
}

py::tuple generate(const std::vector<std::size_t>& dims, std::size_t rank, double sigma, std::uint64_t seed,
                   const std::string& loadings, double xi) {
  ScenarioSpec spec;
  spec.dims = dims;
  spec.rank = rank;
  spec.sigma = sigma;
  spec.xi = xi;
  spec.loadings = loadings_of(loadings);
  spec.validate();
  // same streams as `cpd generate`
  RandomSource rng(seed, 0);
  RandomSource model_rng = rng.derive(1);
  RandomSource noise_rng = rng.derive(2);
  const CpModel truth = gen_model(spec, model_rng);
  const DenseTensor y = add_noise(cp_reconstruct(truth), sigma, noise_rng);
  return py::make_tuple(to_array(y), truth.lambdas, truth.factors);
}

std::string simulate(const std::string& config, bool alpha, std::optional<int> jobs) {
  std::istringstream is(config);
  SweepConfig cfg = parse_config(is);
  if (jobs) cfg.jobs = *jobs;
  std::ostringstream os;
  {
    py::gil_scoped_release nogil;
    write_csv(os, run_sweep(cfg, alpha ? SweepMode::Alpha : SweepMode::Sigma));
  }
  return os.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "dense CP decomposition core";

  static py::exception<NumericalError> numerical(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const IoError& e) {
      PyErr_SetString(PyExc_OSError, e.what());
    } catch (const NumericalError& e) {
      PyErr_SetString(numerical.ptr(), e.what());
    }
  });

  m.attr("methods") = known_methods();
  m.attr("csv_header") = kCsvHeader;

  m.def("decompose", &decompose, py::arg("y"), py::arg("rank"), py::arg("method") = "als-tasd",
        py::arg("max_iters") = 100, py::arg("tol") = 1e-8, py::arg("mode_h") = 0, py::arg("alignment") = "auto",
        py::arg("seed") = 0);
  m.def("generate", &generate, py::arg("dims"), py::arg("rank"), py::arg("sigma") = 0.0, py::arg("seed") = 0,
        py::arg("loadings") = "uniform", py::arg("xi") = 0.0);
  m.def("simulate", &simulate, py::arg("config"), py::arg("alpha") = false, py::arg("jobs") = std::nullopt);

  m.def(
      "reconstruct",
      [](const Vector& lambdas, const std::vector<Matrix>& factors) {
        return to_array(cp_reconstruct(to_model(lambdas, factors)));
      },
      py::arg("lambdas"), py::arg("factors"));
  m.def(
      "unfold", [](const Array& y, std::size_t k) { return unfold(to_tensor(y), k); }, py::arg("y"),
      py::arg("mode"));
  m.def(
      "loss_general",
      [](const std::vector<Matrix>& est, const std::vector<Matrix>& truth) { return loss_general(est, truth); },
      py::arg("est"), py::arg("truth"));
  m.def(
      "loss_matched",
      [](const std::vector<Matrix>& est, const std::vector<Matrix>& truth) { return loss_matched(est, truth); },
      py::arg("est"), py::arg("truth"));
  m.def(
      "read_cpdt", [](const std::string& path) { return to_array(read_cpdt(std::filesystem::path(path))); },
      py::arg("path"));
  m.def(
      "write_cpdt", [](const std::string& path, const Array& y) { write_cpdt(std::filesystem::path(path), to_tensor(y)); },
      py::arg("path"), py::arg("y"));
}
