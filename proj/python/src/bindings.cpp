#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <vector>

#include "nonlindep/analysis.hpp"
#include "nonlindep/calibration.hpp"
#include "nonlindep/error.hpp"
#include "nonlindep/estimators.hpp"
#include "nonlindep/grid_io.hpp"
#include "nonlindep/pipeline.hpp"
#include "nonlindep/preprocess.hpp"
#include "nonlindep/surrogates.hpp"
#include "nonlindep/synth.hpp"

namespace py = pybind11;
using namespace nonlindep;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

Array to_array(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

// (T, N) array, time-major like the on-disk layout.
Array grid_values(const TimeSeriesGrid& g) {
  const auto T = g.length(), N = g.node_count();
  Array out({static_cast<py::ssize_t>(T), static_cast<py::ssize_t>(N)});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t i = 0; i < N; ++i) m(t, i) = g.at(t, i);
  return out;
}

TimeSeriesGrid make_grid(const Array& values, int time_start, int period,
                         std::vector<NodeMeta> nodes) {
  if (values.ndim() != 2) throw py::value_error("expected a (T, N) array");
  const auto T = static_cast<std::size_t>(values.shape(0));
  const auto N = static_cast<std::size_t>(values.shape(1));
  if (nodes.empty()) nodes = synthetic_mesh(N);
  std::vector<double> v(T * N);
  auto m = values.unchecked<2>();
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t i = 0; i < N; ++i) v[i * T + t] = m(t, i);
  return TimeSeriesGrid(std::move(v), T, std::move(nodes), time_start, period, "python");
}

Array matrix_values(const PairMatrix& m) {
  Array out(static_cast<py::ssize_t>(m.size()));
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Nonlinear dependence analysis of gridded time series";

  static py::exception<Error> error(m, "NonlindepError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  py::class_<NodeMeta>(m, "NodeMeta")
      .def(py::init<double, double, std::size_t>(), py::arg("lat"), py::arg("lon"),
           py::arg("index") = 0)
      .def_readwrite("lat", &NodeMeta::lat)
      .def_readwrite("lon", &NodeMeta::lon)
      .def_readwrite("index", &NodeMeta::index);

  m.def("gaussian_mi", &gaussian_mi, py::arg("rho"));
  m.def("extra_normal", &extra_normal, py::arg("mi"), py::arg("mi_gaussian"));
  m.def(
      "pearson",
      [](const Array& x, const Array& y) { return pearson(to_vector(x), to_vector(y)); },
      py::arg("x"), py::arg("y"));
  m.def(
      "equiquantal_bins",
      [](const Array& x, int bins) {
        const auto b = equiquantal_bins(to_vector(x), bins);
        return std::vector<int>(b.labels.begin(), b.labels.end());
      },
      py::arg("x"), py::arg("bins") = 8);
  m.def(
      "mutual_information",
      [](const Array& x, const Array& y, int bins) {
        return mutual_information_binned(equiquantal_bins(to_vector(x), bins),
                                         equiquantal_bins(to_vector(y), bins));
      },
      py::arg("x"), py::arg("y"), py::arg("bins") = 8,
      "Raw plug-in MI in nats of equiquantally binned series.");

  py::class_<CalibrationCurve>(m, "CalibrationCurve")
      .def_readonly("length", &CalibrationCurve::length)
      .def_readonly("bins", &CalibrationCurve::bins)
      .def_readonly("seed", &CalibrationCurve::seed)
      .def_readonly("replicates", &CalibrationCurve::replicates)
      .def_readonly("knots", &CalibrationCurve::knots)
      .def("__call__", [](const CalibrationCurve& c, double raw) { return calibrate(raw, c); })
      .def("to_json", &calibration_to_json)
      .def_static("from_json", &calibration_from_json);
  m.def(
      "build_calibration",
      [](std::size_t length, int bins, std::vector<double> rho_grid, std::size_t replicates,
         std::uint64_t seed, int threads) {
        if (rho_grid.empty()) rho_grid = default_rho_grid();
        py::gil_scoped_release release;
        return build_calibration(length, bins, rho_grid, replicates, seed, threads);
      },
      py::arg("length"), py::arg("bins") = 8, py::arg("rho_grid") = std::vector<double>{},
      py::arg("replicates") = kDefaultCalibrationReplicates, py::arg("seed") = 0,
      py::arg("threads") = 1);
  m.def("load_calibration", &load_calibration, py::arg("path"));

  m.def(
      "ft_surrogate",
      [](const Array& values, std::uint64_t seed) {
        return grid_values(ft_surrogate(make_grid(values, 1, 1, {}), seed));
      },
      py::arg("values"), py::arg("seed"),
      "Multivariate Fourier-transform surrogate of a (T, N) array.");
  m.def("amplitude_spectrum",
        [](const Array& x) { return to_array(amplitude_spectrum(to_vector(x))); });

  m.def(
      "preprocess",
      [](const Array& values, const std::string& stages, int time_start, int period) {
        const auto grid = make_grid(values, time_start, period, {});
        return grid_values(PreprocessPipeline::parse(stages).apply(grid));
      },
      py::arg("values"), py::arg("stages") = "anomaly,gaussianize,varnorm,detrend",
      py::arg("time_start") = 1, py::arg("period") = 12);

  m.def(
      "pairwise",
      [](const Array& values, const std::string& kind, int bins,
         const CalibrationCurve* curve, int threads) {
        const auto grid = make_grid(values, 1, 1, {});
        if (kind == "mi" && !curve) throw py::value_error("kind 'mi' needs a calibration curve");
        if (kind != "correlation" && kind != "mi_raw" && kind != "mi") {
          throw py::value_error("kind must be correlation, mi_raw or mi");
        }
        PairMatrix result;
        {
          py::gil_scoped_release release;
          if (kind == "correlation") result = pairwise_correlation(grid, threads);
          else if (kind == "mi_raw") result = pairwise_mi_raw(grid, bins, threads);
          else result = pairwise_mi(grid, bins, *curve, threads);
        }
        return matrix_values(result);
      },
      py::arg("values"), py::arg("kind") = "correlation", py::arg("bins") = 8,
      py::arg("curve") = nullptr, py::arg("threads") = 1,
      "Condensed upper-triangular matrix of a pairwise statistic.");
  m.def("condensed_index", &condensed_index, py::arg("i"), py::arg("j"), py::arg("n"));
  m.def("significance_threshold", &significance_threshold, py::arg("alpha"),
        py::arg("n_surr"));
  m.def(
      "load_pair_matrix",
      [](const std::string& path) {
        const auto pm = load_pair_matrix(path);
        return py::make_tuple(pm.n(), to_string(pm.kind()), matrix_values(pm));
      },
      py::arg("path"), "Returns (n, kind, condensed values).");

  m.def(
      "synth",
      [](const std::string& spec_json) { return grid_values(generate(synth_spec_from_json(spec_json))); },
      py::arg("spec_json"), "Synthetic (T, N) grid from a SynthSpec JSON document.");

  m.def(
      "analyze",
      [](const std::string& config_json, const std::string& base_dir) {
        const auto config = run_config_from_json(config_json, base_dir);
        py::gil_scoped_release release;
        return run(config).summary_json;
      },
      py::arg("config_json"), py::arg("base_dir") = "",
      "Runs the full analysis; returns the summary JSON text.");
}
