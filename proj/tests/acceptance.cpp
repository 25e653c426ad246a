// Acceptance run: one PASS/FAIL line per criterion.
// Usage: acceptance [--full]   (--full adds the multi-hour (1000, 1200) table run)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rwsdetect/calibration.hpp"
#include "rwsdetect/detectors.hpp"
#include "rwsdetect/experiments.hpp"
#include "rwsdetect/likelihood.hpp"
#include "rwsdetect/mp_law.hpp"
#include "support.hpp"

using namespace rws;

namespace {

struct Result {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool report(int id, const std::string& name, const std::function<void(Result&)>& body) {
  Result res;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(res);
  } catch (const std::exception& e) {
    res.pass = false;
    res.detail << " [exception: " << e.what() << "]";
  }
  std::printf("criterion %d %s: %s (%.1f s)%s\n", id, name.c_str(), res.pass ? "PASS" : "FAIL",
              seconds_since(t0), res.detail.str().c_str());
  std::fflush(stdout);
  return res.pass;
}

double rate(const std::vector<Spectrum>& specs, const std::function<bool(const Spectrum&)>& rej) {
  int c = 0;
  for (const auto& s : specs) c += rej(s) ? 1 : 0;
  return static_cast<double>(c) / static_cast<double>(specs.size());
}

void mp_toolkit(Result& res) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_norm = 0, worst_mean = 0, worst_log = 0, worst_h = 0, worst_q = 0;
  int pairs = 0;
  for (double g : {0.5, 1.0, 1.2, 2.0, 5.0}) {
    const MPLaw law(g);
    const double mass = oracle::mp_expectation(g, [](double) { return 1.0; }) + oracle::mp_atom(g);
    worst_norm = std::max(worst_norm, std::abs(mass - 1.0));
    worst_norm = std::max(worst_norm, std::abs(law.cdf(law.edge_plus() + 1.0) - 1.0));
    const double mean = oracle::mp_expectation(g, [](double x) { return x; });
    worst_mean = std::max(worst_mean, std::abs(mean - 1.0));
    const double edge = law.edge_plus();
    for (double offset : {0.1, 1.0, 10.0, 50.0}) {
      const double t = edge + offset;
      const double ref =
          oracle::mp_expectation(g, [t](double x) { return std::log(t - x); }) +
          oracle::mp_atom(g) * std::log(t);
      worst_log = std::max(worst_log, std::abs(log_integral(g, t) - ref));
      const double h = 1e-5;
      const double fd = (log_integral(g, t + h) - log_integral(g, t - h)) / (2.0 * h);
      worst_h = std::max(worst_h, std::abs(hilbert_transform(g, t) - fd));
      ++pairs;
    }
  }
  for (auto [n, p] : {std::pair{100, 120}, std::pair{200, 200}, std::pair{150, 300}}) {
    const MPLaw law = MPLaw::for_dims(n, p);
    const auto table = quantiles(law, n, p);
    const double m = std::min(n, p);
    for (std::size_t k = 0; k < table.q.size(); ++k) {
      if (table.q[k] <= law.edge_minus()) continue;
      const double tail = law.tail_mass(table.q[k]) / law.continuous_mass();
      worst_q = std::max(worst_q, std::abs(tail - (k + 1) / m));
    }
  }
  const double elapsed = seconds_since(t0);
  res.detail << " norm " << worst_norm << ", mean " << worst_mean << ", quantile round trip "
             << worst_q << ", log integral (" << pairs << " pairs) " << worst_log << ", hilbert "
             << worst_h;
  res.check(worst_norm < 1e-8, "normalization");
  res.check(worst_mean < 1e-8, "mean");
  res.check(worst_q < 1e-7, "quantile round trip");
  res.check(pairs == 20 && worst_log < 1e-7, "log integral");
  res.check(worst_h < 1e-6, "hilbert transform");
  res.check(elapsed < 10.0, "runtime");
}

void dual_forms(Result& res) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> dim(3, 30);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  int checked = 0;
  for (int trial = 0; checked < 100 && trial < 1000; ++trial) {
    const int n = dim(rng), p = dim(rng);
    const double excess = 0.9 * std::sqrt(static_cast<double>(p) / n) * unit(rng) + 1e-3;
    const int r = std::min(p, 1 + static_cast<int>(unit(rng) * 5));
    const SpikeParams params = SpikeParams::from_excess(n, p, r, excess);
    const Spectrum s = eigenvalues(sample_null(n, p, derive_seed(17, trial, Hypothesis::null)));
    const auto e = proxy_lr_eigform(s, params);
    if (e.guard_triggered) continue;
    const auto m = proxy_lr_measform(s, params, MPLaw::for_dims(n, p));
    worst = std::max(worst, std::abs(e.log_value - m.log_value) / std::max(1.0, std::abs(e.log_value)));
    ++checked;
  }
  double worst_psi = 0.0;
  for (int p : {120, 200}) {
    for (double d : {0.05, 0.1}) {
      const SpikeParams params{100, p, 1, d};
      const double g = p / 100.0;
      const double closed = std::log1p(-d) / d + 1.0 / (1.0 - d);
      const double quad = oracle::mp_expectation(g, [&](double x) { return psi(x, params); }) +
                          oracle::mp_atom(g) * psi(0.0, params);
      worst_psi = std::max(worst_psi, std::abs(quad - closed));
    }
  }
  const double elapsed = seconds_since(t0);
  res.detail << " " << checked << " instances, max rel diff " << worst << ", psi identity "
             << worst_psi;
  res.check(checked == 100 && worst <= 1e-10, "dual forms");
  res.check(worst_psi <= 1e-6, "psi identity");
  res.check(elapsed < 30.0, "runtime");
}

void critical_normality(Result& res) {
  const auto s = critical_loglr_experiment(CriticalCalibration{0.5, 1.0, 1.2, 400}, 500, 20240601);
  res.detail << " mean_null " << s.mean_null << " (se " << s.se_mean_null << "), var_null "
             << s.var_null << " (se " << s.se_var_null << "), mean_alt " << s.mean_alt << " (se "
             << s.se_mean_alt << ")";
  res.check(std::abs(s.mean_null + 0.5) <= 0.15, "null mean");
  res.check(std::abs(s.var_null - 1.0) <= 0.3, "null variance");
  res.check(std::abs(s.mean_alt - 0.5) <= 0.15, "alternative mean");
}

void null_levels(Result& res) {
  const NullCalibration& cal = oracle::calibration_300_360();
  std::vector<Spectrum> specs(1000);
  parallel_for(specs.size(), {}, [&](std::size_t i) {
    specs[i] = eigenvalues(sample_null(300, 360, derive_seed(31337, i, Hypothesis::null)));
  });
  const double tr = rate(specs, [](const Spectrum& s) { return trace_test(s, 1.0).reject; });
  const double cs = rate(specs, [&](const Spectrum& s) { return cusum_plus(s, cal, 300).reject; });
  const double hc = rate(specs, [&](const Spectrum& s) { return hc_plus(s, cal, 300).reject; });
  const double tw = rate(specs, [&](const Spectrum& s) { return tw_test(s, cal, 300).reject; });
  res.detail << " trace " << tr << ", cs+ " << cs << ", hc+ " << hc << ", tw " << tw;
  res.check(tr <= 0.02, "trace");
  res.check(cs <= 0.01, "cs+");
  res.check(hc <= 0.01, "hc+");
  res.check(tw <= 0.005, "tw");
}

void phase_endpoints(Result& res) {
  PhaseSweepConfig config;
  config.alpha_grid = {0.9};
  config.beta_grid = {0.9};
  config.gamma = 1.2;
  config.n = 300;
  config.reps = 200;
  config.tests = {TestName::trace};
  const auto deep_undetectable = phase_sweep(config, 501, nullptr);
  config.alpha_grid = {0.2};
  config.beta_grid = {0.2};
  const auto deep_detectable = phase_sweep(config, 502, nullptr);
  const double r_und = deep_undetectable.points[0].get(TestName::trace).risk;
  const double r_det = deep_detectable.points[0].get(TestName::trace).risk;

  // alpha > 2/3 and alpha + beta < 1: trace detects, TW does not
  CalibrationOptions opts;
  opts.created_at = "acceptance";
  const NullCalibration cal500 = calibrate_null(500, 500, 500, 503, opts);
  PhaseSweepConfig tw_config;
  tw_config.alpha_grid = {0.67};
  tw_config.beta_grid = {0.01};
  tw_config.gamma = 1.0;
  tw_config.n = 500;
  tw_config.reps = 200;
  tw_config.tests = {TestName::trace, TestName::tw};
  const auto sub = phase_sweep(tw_config, 504, &cal500);
  const auto& pt = sub.points[0];
  const double tw = pt.get(TestName::tw).risk;
  const double tr = pt.get(TestName::trace).risk;
  res.detail << " trace risk at (0.9,0.9) " << r_und << ", at (0.2,0.2) " << r_det
             << "; at (0.67,0.01) n=500 r=" << pt.params.r << ": tw " << tw << ", trace " << tr;
  res.check(r_und >= 0.9, "undetectable point");
  res.check(r_det <= 0.1, "detectable point");
  res.check(tw >= 0.8 && tr <= 0.2, "tw sub-optimality");
}

void rigidity(Result& res) {
  const NullCalibration& cal = oracle::calibration_300_360();
  const auto null = rigidity_audit(RigidityConfig{300, 360, 200, Hypothesis::null, std::nullopt},
                                   601, cal);
  const SpikeParams params = calibrate(AsymptoticCalibration{0.8, 0.5, 1.2, 300});
  const auto alt = rigidity_audit(RigidityConfig{300, 360, 200, Hypothesis::rws, params}, 602, cal);
  res.detail << " null: cs " << null.cs_exceed_fraction << ", hc " << null.hc_exceed_fraction
             << ", quantile " << null.quantile_exceed_fraction << "; rws (0.8,0.5): cs "
             << alt.cs_exceed_fraction << ", hc " << alt.hc_exceed_fraction;
  res.check(null.cs_exceed_fraction == 0.0 && null.hc_exceed_fraction == 0.0, "null exceedance");
  res.check(null.quantile_exceed_fraction <= 0.01, "null quantile rigidity");
  res.check(alt.cs_exceed_fraction <= 0.05 && alt.hc_exceed_fraction <= 0.05, "rws exceedance");
}

void orderings(Result& res, bool full) {
  const NullCalibration& cal = oracle::calibration_300_360();
  const std::vector<TestName> tests{TestName::trace, TestName::cs_star, TestName::hc_star,
                                    TestName::tw};
  // spike excess c / r
  const auto one = ideal_error(IdealErrorConfig{300, 360, 1, 2.0, 50, 5}, tests, 701, cal);
  const auto ten = ideal_error(IdealErrorConfig{300, 360, 10, 0.25, 50, 5}, tests, 702, cal);
  auto e = [](const IdealErrorReport& r, TestName t) { return r.get(t).mean_error; };
  res.detail << " r=1: tw " << e(one, TestName::tw) << ", hc " << e(one, TestName::hc_star)
             << ", trace " << e(one, TestName::trace) << "; r=10: trace "
             << e(ten, TestName::trace) << ", cs " << e(ten, TestName::cs_star) << ", tw "
             << e(ten, TestName::tw);
  res.check(e(one, TestName::tw) <= e(one, TestName::hc_star) &&
                e(one, TestName::hc_star) <= e(one, TestName::trace),
            "r=1 ordering");
  res.check(e(ten, TestName::trace) <= e(ten, TestName::tw) &&
                e(ten, TestName::cs_star) <= e(ten, TestName::tw),
            "r=10 ordering");
  if (!full) {
    res.detail << "; full-scale table run not requested";
    return;
  }
  CalibrationOptions opts;
  opts.created_at = "acceptance";
  const NullCalibration big = calibrate_null(1000, 1200, 10000, 703, opts);
  const auto t = ideal_error(IdealErrorConfig{1000, 1200, 5, 0.8, 100, 20}, tests, 704, big);
  const double hc = e(t, TestName::hc_star), tw = e(t, TestName::tw);
  const double cs = e(t, TestName::cs_star), tr = e(t, TestName::trace);
  const double khc = *t.get(TestName::hc_star).mean_argmax;
  const double kcs = *t.get(TestName::cs_star).mean_argmax;
  res.detail << "; full: hc " << hc << ", tw " << tw << ", cs " << cs << ", trace " << tr
             << ", k_hc " << khc << ", k_cs " << kcs;
  res.check(std::abs(hc - 0.28) <= 3 * 0.04 && std::abs(tw - 0.48) <= 3 * 0.05 &&
                std::abs(cs - 0.16) <= 3 * 0.03 && std::abs(tr - 0.18) <= 3 * 0.03,
            "full-scale errors");
  res.check(std::abs(khc - 22) <= 3 * 9.7 && std::abs(kcs - 125) <= 3 * 65, "full-scale argmax");
}

void determinism(Result& res) {
  const NullCalibration& cal = oracle::calibration_300_360();
  std::vector<std::string> docs[2];
  for (unsigned run = 0; run < 2; ++run) {
    ParallelOptions par;
    par.threads = run == 0 ? 1 : 4;
    CalibrationOptions copts;
    copts.parallel = par;
    copts.created_at = "fixed";
    auto& out = docs[run];
    out.push_back(to_json_string(calibrate_null(40, 50, 64, 801, copts)));
    out.push_back(to_json_string(ideal_error(IdealErrorConfig{300, 360, 2, 1.0, 8, 2},
                                             {TestName::trace, TestName::cs_star,
                                              TestName::hc_star, TestName::tw},
                                             802, cal, par)));
    PhaseSweepConfig sc;
    sc.alpha_grid = {0.3, 0.6};
    sc.beta_grid = {0.4};
    sc.gamma = 1.2;
    sc.n = 300;
    sc.reps = 8;
    sc.tests = {TestName::trace, TestName::hc_plus, TestName::cs_star};
    out.push_back(to_json_string(phase_sweep(sc, 803, &cal, par)));
    out.push_back(to_json_string(
        rigidity_audit(RigidityConfig{300, 360, 8, Hypothesis::null, std::nullopt}, 804, cal, par)));
    const auto crit = critical_loglr_experiment(CriticalCalibration{0.5, 1.0, 1.2, 100}, 16, 805, par);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g", crit.mean_null, crit.var_null, crit.mean_alt);
    out.push_back(buf);
  }
  std::size_t same = 0;
  for (std::size_t i = 0; i < docs[0].size(); ++i) same += docs[0][i] == docs[1][i] ? 1 : 0;
  res.detail << " " << same << "/" << docs[0].size() << " reports identical across thread counts";
  res.check(same == docs[0].size(), "byte-identical reports");
}

}  // namespace

int main(int argc, char** argv) {
  bool full = false;
  for (int i = 1; i < argc; ++i) full = full || std::strcmp(argv[i], "--full") == 0;
  bool ok = true;
  ok &= report(1, "mp toolkit", mp_toolkit);
  ok &= report(2, "dual-form likelihood", dual_forms);
  ok &= report(3, "critical normality", critical_normality);
  ok &= report(4, "null levels", null_levels);
  ok &= report(5, "phase endpoints", phase_endpoints);
  ok &= report(6, "rigidity audits", rigidity);
  ok &= report(7, "error orderings", [full](Result& r) { orderings(r, full); });
  ok &= report(8, "determinism", determinism);
  return ok ? 0 : 1;
}
