#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rwsdetect/calibration.hpp"
#include "rwsdetect/detectors.hpp"
#include "rwsdetect/experiments.hpp"
#include "rwsdetect/likelihood.hpp"
#include "rwsdetect/mp_law.hpp"
#include "rwsdetect/sampling.hpp"
#include "rwsdetect/spectrum.hpp"

namespace py = pybind11;
using namespace rws;

namespace {

ParallelOptions threads(unsigned t) {
  ParallelOptions o;
  o.threads = t;
  return o;
}

std::vector<TestName> test_names(const std::vector<std::string>& names) {
  std::vector<TestName> out;
  for (const auto& s : names) out.push_back(test_from_string(s));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Detection of rare and weak spikes in large covariance matrices";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<MPLaw>(m, "MPLaw")
      .def(py::init<double>(), py::arg("gamma"))
      .def_static("for_dims", &MPLaw::for_dims, py::arg("n"), py::arg("p"))
      .def_property_readonly("gamma", &MPLaw::gamma)
      .def_property_readonly("edge_minus", &MPLaw::edge_minus)
      .def_property_readonly("edge_plus", &MPLaw::edge_plus)
      .def_property_readonly("point_mass_at_zero", &MPLaw::point_mass_at_zero)
      .def("density", &MPLaw::density)
      .def("cdf", &MPLaw::cdf)
      .def("tail_mass", &MPLaw::tail_mass);

  m.def("quantiles", [](std::int64_t n, std::int64_t p) {
    return quantiles(MPLaw::for_dims(n, p), n, p).q;
  }, py::arg("n"), py::arg("p"));
  m.def("log_integral", &log_integral, py::arg("gamma"), py::arg("t"));
  m.def("hilbert_transform", &hilbert_transform, py::arg("gamma"), py::arg("t"));

  py::class_<SpikeParams>(m, "SpikeParams")
      .def(py::init([](std::int64_t n, std::int64_t p, std::int64_t r, double delta) {
             SpikeParams s{n, p, r, delta};
             s.validate();
             return s;
           }),
           py::arg("n"), py::arg("p"), py::arg("r"), py::arg("delta"))
      .def_static("from_excess", &SpikeParams::from_excess, py::arg("n"), py::arg("p"),
                  py::arg("r"), py::arg("excess"))
      .def_static("asymptotic",
                  [](double alpha, double beta, double gamma, std::int64_t n) {
                    return calibrate(AsymptoticCalibration{alpha, beta, gamma, n});
                  },
                  py::arg("alpha"), py::arg("beta"), py::arg("gamma"), py::arg("n"))
      .def_readonly("n", &SpikeParams::n)
      .def_readonly("p", &SpikeParams::p)
      .def_readonly("r", &SpikeParams::r)
      .def_readonly("delta", &SpikeParams::delta)
      .def_property_readonly("excess", &SpikeParams::spike_excess);

  m.def("sample", [](const std::string& hypothesis, std::int64_t n, std::int64_t p,
                     std::uint64_t seed, std::optional<SpikeParams> params) -> RowMatrix {
    const Hypothesis h = hypothesis_from_string(hypothesis);
    if (h == Hypothesis::null) return sample_null(n, p, seed).values;
    if (!params) throw ConfigError("spike parameters required for hypothesis " + hypothesis);
    if (params->n != n || params->p != p) throw ConfigError("spike parameters do not match (n, p)");
    return sample(h, *params, seed).values;
  }, py::arg("hypothesis"), py::arg("n"), py::arg("p"), py::arg("seed"),
     py::arg("params") = std::nullopt);

  py::class_<Spectrum>(m, "Spectrum")
      .def_readonly("n", &Spectrum::n)
      .def_readonly("p", &Spectrum::p)
      .def_readonly("lam", &Spectrum::lambda)
      .def_readonly("cumsum", &Spectrum::cumsum)
      .def("trace", &Spectrum::trace);
  m.def("eigenvalues", [](const RowMatrix& x) { return eigenvalues(x); }, py::arg("x"));
  m.def("spectrum_from_values", &Spectrum::from_values, py::arg("n"), py::arg("p"),
        py::arg("values"));

  py::class_<NullCalibration>(m, "NullCalibration")
      .def_readonly("n", &NullCalibration::n)
      .def_readonly("p", &NullCalibration::p)
      .def_readonly("reps", &NullCalibration::reps)
      .def_readonly("mean_lambda", &NullCalibration::mean_lambda)
      .def_readonly("sd_lambda", &NullCalibration::sd_lambda)
      .def_readonly("mean_S", &NullCalibration::mean_S)
      .def_readonly("sd_S", &NullCalibration::sd_S)
      .def("to_json", [](const NullCalibration& c) { return to_json_string(c); })
      .def_static("from_json", &from_json_string)
      .def("save", [](const NullCalibration& c, const std::filesystem::path& path) { save(c, path); })
      .def_static("load", [](const std::filesystem::path& path) { return load(path); });
  m.def("calibrate_null", [](std::int64_t n, std::int64_t p, std::int64_t reps, std::uint64_t seed,
                             unsigned nthreads) {
    CalibrationOptions opts;
    opts.parallel = threads(nthreads);
    py::gil_scoped_release release;
    return calibrate_null(n, p, reps, seed, opts);
  }, py::arg("n"), py::arg("p"), py::arg("reps"), py::arg("seed"), py::arg("threads") = 0);

  py::class_<TestOutcome>(m, "TestOutcome")
      .def_property_readonly("name", [](const TestOutcome& o) { return to_string(o.name); })
      .def_readonly("statistic", &TestOutcome::statistic)
      .def_readonly("threshold", &TestOutcome::threshold)
      .def_readonly("reject", &TestOutcome::reject)
      .def_readonly("argmax_k", &TestOutcome::argmax_k);
  m.def("trace_test", &trace_test, py::arg("spectrum"), py::arg("q") = 1.0);
  m.def("tw_test", [](const Spectrum& s, const NullCalibration& c) { return tw_test(s, c, s.n); });
  m.def("cusum_plus", [](const Spectrum& s, const NullCalibration& c) { return cusum_plus(s, c, s.n); });
  m.def("hc_plus", [](const Spectrum& s, const NullCalibration& c) { return hc_plus(s, c, s.n); });
  m.def("cusum_star", &cusum_star, py::arg("spectrum"), py::arg("calibration"), py::arg("threshold"));
  m.def("hc_star", &hc_star, py::arg("spectrum"), py::arg("calibration"), py::arg("threshold"));

  m.def("proxy_log_lr", [](const Spectrum& s, const SpikeParams& params) {
    const ProxyLR r = proxy_lr_eigform(s, params);
    return py::make_tuple(r.log_value, r.guard_triggered);
  }, py::arg("spectrum"), py::arg("params"));
  m.def("critical_experiment", [](double beta, double theta, double gamma, std::int64_t n,
                                  std::int64_t reps, std::uint64_t seed) {
    CriticalSummary s;
    {
      py::gil_scoped_release release;
      s = critical_loglr_experiment(CriticalCalibration{beta, theta, gamma, n}, reps, seed);
    }
    py::dict d;
    d["mean_null"] = s.mean_null;
    d["var_null"] = s.var_null;
    d["mean_alt"] = s.mean_alt;
    d["var_alt"] = s.var_alt;
    d["theta_n"] = s.theta_n;
    return d;
  }, py::arg("beta"), py::arg("theta"), py::arg("gamma"), py::arg("n"), py::arg("reps"),
     py::arg("seed"));

  m.def("ideal_error_from_values", [](const std::vector<double>& null_values,
                                      const std::vector<double>& alt_values) {
    const ThresholdScan s = ideal_error_from_values(null_values, alt_values);
    return py::make_tuple(s.error, s.threshold);
  });
  m.def("ideal_error", [](std::int64_t n, std::int64_t p, std::int64_t r, double excess,
                          std::int64_t reps_per_side, std::int64_t repetitions,
                          const std::vector<std::string>& tests, std::uint64_t seed,
                          const NullCalibration& cal, unsigned nthreads) {
    IdealErrorConfig config{n, p, r, excess, reps_per_side, repetitions};
    py::gil_scoped_release release;
    return to_json_string(ideal_error(config, test_names(tests), seed, cal, threads(nthreads)));
  }, py::arg("n"), py::arg("p"), py::arg("r"), py::arg("excess"), py::arg("reps_per_side"),
     py::arg("repetitions"), py::arg("tests"), py::arg("seed"), py::arg("calibration"),
     py::arg("threads") = 0);
}
