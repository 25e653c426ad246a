// Command line front end: calibrate, sample, quantiles, test, ideal-error,
// sweep, audit and critical. Flags can also come from a JSON file given with
// --config: global flags at the top level, subcommand flags in an object
// named after the subcommand, e.g. {"threads": 2, "calibrate": {"n": 300}}.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rwsdetect/calibration.hpp"
#include "rwsdetect/detectors.hpp"
#include "rwsdetect/experiments.hpp"
#include "rwsdetect/likelihood.hpp"
#include "rwsdetect/mp_law.hpp"
#include "rwsdetect/sampling.hpp"
#include "rwsdetect/spectrum.hpp"

namespace {

using nlohmann::json;

class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    json j;
    for (const CLI::Option* opt : app->get_options({})) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string name = opt->get_lnames()[0];
      if (opt->count() > 0) {
        const auto& res = opt->results();
        j[name] = res.size() == 1 ? json(res[0]) : json(res);
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config file: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void flatten(const json& j, std::vector<std::string> parents,
                      std::vector<CLI::ConfigItem>& items) {
    if (!j.is_object()) throw CLI::ConversionError("config file: top level must be an object");
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto nested = parents;
        nested.push_back(key);
        flatten(value, nested, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw rws::ConfigError("cannot open '" + path + "' for writing");
  out << text << '\n';
}

template <typename Report>
void emit_report(const Report& report, const std::string& out_prefix) {
  if (out_prefix.empty()) {
    std::cout << rws::to_json_string(report) << '\n';
    return;
  }
  emit(rws::to_json_string(report), out_prefix + ".json");
  std::ofstream csv(out_prefix + ".csv");
  if (!csv) throw rws::ConfigError("cannot open '" + out_prefix + ".csv' for writing");
  rws::write_csv(csv, report);
}

std::vector<rws::TestName> parse_tests(const std::vector<std::string>& names) {
  std::vector<rws::TestName> out;
  for (const auto& s : names) out.push_back(rws::test_from_string(s));
  return out;
}

// Either load the given table or run a fresh calibration with its own seed stream.
rws::NullCalibration obtain_calibration(const std::string& path, std::int64_t n, std::int64_t p,
                                        std::int64_t reps, std::uint64_t seed,
                                        const rws::ParallelOptions& parallel) {
  if (!path.empty()) return rws::load(path, n, p);
  rws::CalibrationOptions opts;
  opts.parallel = parallel;
  return rws::calibrate_null(n, p, reps, rws::mix64(seed ^ 0x63616c6962ULL), opts);
}

json outcome_json(const rws::TestOutcome& o) {
  json j{{"stat", rws::to_string(o.name)},
         {"statistic", o.statistic},
         {"threshold", o.threshold},
         {"reject", o.reject}};
  if (o.argmax_k) j["argmax_k"] = *o.argmax_k;
  return j;
}

struct SpikeFlags {
  std::int64_t r = 0;
  double excess = 0.0;
  double delta = 0.0;
  double alpha = 0.0;
  double beta = 0.0;

  void add(CLI::App* app) {
    app->add_option("--r", r, "number of spikes");
    app->add_option("--excess", excess, "spike excess delta/(1-delta)");
    app->add_option("--delta", delta, "spike strength delta (alternative to --excess)");
    app->add_option("--alpha", alpha, "delta = n^-alpha (with --beta)");
    app->add_option("--beta", beta, "r = round(n^(1-beta)) (with --alpha)");
  }

  rws::SpikeParams resolve(std::int64_t n, std::int64_t p) const {
    if (alpha > 0.0 || beta > 0.0) {
      const double gamma = static_cast<double>(p) / static_cast<double>(n);
      auto params = rws::calibrate(rws::AsymptoticCalibration{alpha, beta, gamma, n});
      params.p = p;
      params.validate();
      return params;
    }
    if (delta > 0.0) {
      rws::SpikeParams params{n, p, r, delta};
      params.validate();
      return params;
    }
    return rws::SpikeParams::from_excess(n, p, r, excess);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detection of rare and weak spikes in large covariance matrices"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file with flag values");
  app.require_subcommand(1);
  app.fallthrough();

  rws::ParallelOptions parallel;
  app.add_option("--threads", parallel.threads, "worker threads (0: all cores)");

  std::int64_t n = 300, p = 360, reps = 1000, cal_reps = 1000;
  std::uint64_t seed = 1;
  std::string out, calibration_path;

  // calibrate
  auto* cal_cmd = app.add_subcommand("calibrate", "Monte Carlo null moments of lambda_k and S_k");
  bool means_only = false;
  std::int64_t block_size = 32;
  double work_budget = 1e14;
  cal_cmd->add_option("--n", n)->required();
  cal_cmd->add_option("--p", p)->required();
  cal_cmd->add_option("--reps", reps)->required();
  cal_cmd->add_option("--seed", seed);
  cal_cmd->add_option("--out", out, "output JSON file")->required();
  cal_cmd->add_flag("--means-only", means_only);
  cal_cmd->add_option("--block-size", block_size);
  cal_cmd->add_option("--work-budget", work_budget);

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "Draw one data matrix");
  std::string hypothesis = "null", dump_data, spectrum_csv;
  SpikeFlags spike;
  sample_cmd->add_option("--hypothesis", hypothesis, "null, rws or proxy");
  sample_cmd->add_option("--n", n)->required();
  sample_cmd->add_option("--p", p)->required();
  sample_cmd->add_option("--seed", seed);
  spike.add(sample_cmd);
  sample_cmd->add_option("--dump-data", dump_data, "binary data file");
  sample_cmd->add_option("--spectrum-csv", spectrum_csv, "eigenvalue table");

  // quantiles
  auto* q_cmd = app.add_subcommand("quantiles", "MP quantiles q_k as CSV");
  q_cmd->add_option("--n", n)->required();
  q_cmd->add_option("--p", p)->required();
  q_cmd->add_option("--out", out);

  // test
  auto* test_cmd = app.add_subcommand("test", "Run detectors on one dataset");
  std::string data_path;
  std::vector<std::string> stats{"trace"};
  double q = 1.0, level = 0.05;
  std::optional<double> z;
  std::int64_t threshold_reps = 1000;
  test_cmd->add_option("--data", data_path, "binary data file (otherwise one is drawn)");
  test_cmd->add_option("--hypothesis", hypothesis);
  test_cmd->add_option("--n", n);
  test_cmd->add_option("--p", p);
  test_cmd->add_option("--seed", seed);
  spike.add(test_cmd);
  test_cmd->add_option("--calib,--calibration", calibration_path);
  test_cmd->add_option("--calibration-reps", cal_reps);
  test_cmd->add_option("--stat", stats, "trace, trace2, cs, cs+, hc, hc+, tw")->delimiter(',');
  test_cmd->add_option("--q", q, "trace threshold sqrt(2 q log n)");
  test_cmd->add_option("--level", level, "null-quantile level for cs, hc and default trace2");
  test_cmd->add_option("--z", z, "trace2 threshold (default: null quantile at --level)");
  test_cmd->add_option("--threshold-reps", threshold_reps);

  // ideal-error
  auto* ie_cmd = app.add_subcommand("ideal-error", "Ideal testing error of each detector");
  rws::IdealErrorConfig ie;
  ie.n = 300;
  ie.p = 360;
  ie.r = 1;
  ie.delta_excess = 1.0;
  ie.reps_per_side = 50;
  ie.repetitions = 5;
  bool full = false;
  std::vector<std::string> tests{"hc", "cs", "trace", "tw"};
  ie_cmd->add_option("--n", ie.n);
  ie_cmd->add_option("--p", ie.p);
  ie_cmd->add_option("--r", ie.r);
  ie_cmd->add_option("--excess", ie.delta_excess);
  ie_cmd->add_option("--reps-per-side", ie.reps_per_side);
  ie_cmd->add_option("--repetitions", ie.repetitions);
  ie_cmd->add_option("--tests", tests)->delimiter(',');
  ie_cmd->add_option("--seed", seed);
  ie_cmd->add_option("--calib,--calibration", calibration_path);
  ie_cmd->add_option("--calibration-reps", cal_reps);
  ie_cmd->add_flag("--full", full,
                   "full-scale protocol: (n,p)=(1000,1200), 100 per side, 20 repetitions, "
                   "10000 calibration replicates; takes hours");
  ie_cmd->add_option("--out", out, "output prefix (<out>.json, <out>.csv)");

  // sweep
  auto* sw_cmd = app.add_subcommand("sweep", "Empirical risk over an (alpha, beta) grid");
  rws::PhaseSweepConfig sw;
  sw.n = 300;
  sw.gamma = 1.2;
  sw.alpha_grid = {0.2, 0.4, 0.6, 0.8};
  sw.beta_grid = {0.2, 0.4, 0.6, 0.8};
  std::vector<std::string> sweep_tests{"trace", "tw", "cs+", "hc+"};
  std::string plot_stem;
  sw_cmd->add_option("--alpha-grid", sw.alpha_grid)->delimiter(',');
  sw_cmd->add_option("--beta-grid", sw.beta_grid)->delimiter(',');
  sw_cmd->add_option("--gamma", sw.gamma);
  sw_cmd->add_option("--n", sw.n);
  sw_cmd->add_option("--reps", sw.reps);
  sw_cmd->add_option("--tests", sweep_tests)->delimiter(',');
  sw_cmd->add_option("--q", sw.trace_q);
  sw_cmd->add_option("--level", sw.level);
  sw_cmd->add_option("--threshold-reps", sw.threshold_reps);
  sw_cmd->add_option("--seed", seed);
  sw_cmd->add_option("--calib,--calibration", calibration_path);
  sw_cmd->add_option("--calibration-reps", cal_reps);
  sw_cmd->add_option("--out", out, "output prefix (<out>.json, <out>.csv)");
  sw_cmd->add_option("--plot", plot_stem, "gnuplot data/script stem");

  // audit
  auto* au_cmd = app.add_subcommand("audit", "Rigidity audit of S_k and lambda_k deviations");
  std::int64_t audit_reps = 200;
  au_cmd->add_option("--n", n);
  au_cmd->add_option("--p", p);
  au_cmd->add_option("--reps", audit_reps);
  au_cmd->add_option("--hypothesis", hypothesis, "null or rws");
  spike.add(au_cmd);
  au_cmd->add_option("--seed", seed);
  au_cmd->add_option("--calib,--calibration", calibration_path);
  au_cmd->add_option("--calibration-reps", cal_reps);
  au_cmd->add_option("--out", out, "output prefix (<out>.json, <out>.csv)");

  // critical
  auto* cr_cmd = app.add_subcommand("critical", "Log-likelihood-ratio proxy in the critical case");
  rws::CriticalCalibration cc{0.5, 1.0, 1.2, 400};
  std::int64_t critical_reps = 500;
  cr_cmd->add_option("--beta", cc.beta);
  cr_cmd->add_option("--theta", cc.theta);
  cr_cmd->add_option("--gamma", cc.gamma);
  cr_cmd->add_option("--n", cc.n);
  cr_cmd->add_option("--reps", critical_reps);
  cr_cmd->add_option("--seed", seed);
  cr_cmd->add_option("--out", out, "output JSON file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (cal_cmd->parsed()) {
      rws::CalibrationOptions opts;
      opts.parallel = parallel;
      opts.means_only = means_only;
      opts.block_size = block_size;
      opts.work_budget = work_budget;
      rws::save(rws::calibrate_null(n, p, reps, seed, opts), out);
    } else if (sample_cmd->parsed()) {
      const auto h = rws::hypothesis_from_string(hypothesis);
      rws::SpikeParams params{n, p, 0, 0.5};
      if (h != rws::Hypothesis::null) params = spike.resolve(n, p);
      const rws::DataMatrix data = rws::sample(h, params, seed);
      if (!dump_data.empty()) rws::save_binary(dump_data, data);
      if (!spectrum_csv.empty()) {
        std::ofstream csv(spectrum_csv);
        if (!csv) throw rws::ConfigError("cannot open '" + spectrum_csv + "' for writing");
        rws::write_csv(csv, rws::eigenvalues(data));
      }
      if (dump_data.empty() && spectrum_csv.empty()) rws::write_csv(std::cout, rws::eigenvalues(data));
    } else if (q_cmd->parsed()) {
      const auto table = rws::quantiles(rws::MPLaw::for_dims(n, p), n, p);
      if (out.empty()) {
        rws::write_csv(std::cout, table);
      } else {
        std::ofstream csv(out);
        if (!csv) throw rws::ConfigError("cannot open '" + out + "' for writing");
        rws::write_csv(csv, table);
      }
    } else if (test_cmd->parsed()) {
      rws::DataMatrix data;
      if (!data_path.empty()) {
        data = rws::load_binary(data_path);
      } else {
        const auto h = rws::hypothesis_from_string(hypothesis);
        rws::SpikeParams params{n, p, 0, 0.5};
        if (h != rws::Hypothesis::null) params = spike.resolve(n, p);
        data = rws::sample(h, params, seed);
      }
      const rws::Spectrum spec = rws::eigenvalues(data);
      const auto names = parse_tests(stats);
      const bool only_trace = std::all_of(names.begin(), names.end(),
                                          [](rws::TestName t) { return t == rws::TestName::trace; });
      rws::DetectorSettings settings;
      settings.trace_q = q;
      rws::NullCalibration cal;
      if (!only_trace) {
        cal = obtain_calibration(calibration_path, spec.n, spec.p, cal_reps, seed, parallel);
        const bool needs_policy = std::any_of(names.begin(), names.end(), [&](rws::TestName t) {
          return t == rws::TestName::cs_star || t == rws::TestName::hc_star ||
                 (t == rws::TestName::trace2 && !z);
        });
        if (needs_policy) {
          settings.starred = rws::null_quantile_thresholds(
              cal, threshold_reps, rws::mix64(cal.master_seed ^ 0x7468726573686f6cULL), level,
              parallel);
        }
        settings.trace2_z = z ? *z : (settings.starred ? settings.starred->trace2 : 0.0);
      }
      for (rws::TestName t : names) {
        std::cout << outcome_json(rws::run_test(t, spec, cal, settings)).dump() << '\n';
      }
    } else if (ie_cmd->parsed()) {
      if (full) {
        ie.n = 1000;
        ie.p = 1200;
        ie.reps_per_side = 100;
        ie.repetitions = 20;
        cal_reps = 10000;
      }
      const auto cal = obtain_calibration(calibration_path, ie.n, ie.p, cal_reps, seed, parallel);
      emit_report(rws::ideal_error(ie, parse_tests(tests), seed, cal, parallel), out);
    } else if (sw_cmd->parsed()) {
      sw.tests = parse_tests(sweep_tests);
      const auto sp = static_cast<std::int64_t>(std::llround(sw.gamma * static_cast<double>(sw.n)));
      std::optional<rws::NullCalibration> cal;
      const bool only_trace = std::all_of(sw.tests.begin(), sw.tests.end(),
                                          [](rws::TestName t) { return t == rws::TestName::trace; });
      if (!only_trace) cal = obtain_calibration(calibration_path, sw.n, sp, cal_reps, seed, parallel);
      const auto report = rws::phase_sweep(sw, seed, cal ? &*cal : nullptr, parallel);
      emit_report(report, out);
      if (!plot_stem.empty()) rws::write_gnuplot(plot_stem, report);
    } else if (au_cmd->parsed()) {
      rws::RigidityConfig rc;
      rc.n = n;
      rc.p = p;
      rc.reps = audit_reps;
      rc.hypothesis = rws::hypothesis_from_string(hypothesis);
      if (rc.hypothesis != rws::Hypothesis::null) rc.params = spike.resolve(n, p);
      const auto cal = obtain_calibration(calibration_path, n, p, cal_reps, seed, parallel);
      emit_report(rws::rigidity_audit(rc, seed, cal, parallel), out);
    } else if (cr_cmd->parsed()) {
      const auto s = rws::critical_loglr_experiment(cc, critical_reps, seed, parallel);
      json j{{"kind", "critical"},
             {"master_seed", seed},
             {"config",
              {{"beta", cc.beta}, {"theta", cc.theta}, {"gamma", cc.gamma}, {"n", cc.n},
               {"reps", critical_reps}}},
             {"params", {{"p", s.params.p}, {"r", s.params.r}, {"delta", s.params.delta}}},
             {"theta_n", s.theta_n},
             {"mean_null", s.mean_null},
             {"var_null", s.var_null},
             {"mean_alt", s.mean_alt},
             {"var_alt", s.var_alt},
             {"se_mean_null", s.se_mean_null},
             {"se_var_null", s.se_var_null},
             {"se_mean_alt", s.se_mean_alt},
             {"se_var_alt", s.se_var_alt},
             {"trace_proxy_mean_null", s.trace_proxy_mean_null},
             {"trace_proxy_mean_alt", s.trace_proxy_mean_alt},
             {"corr_null", s.corr_null},
             {"guard_null", s.guard_null},
             {"guard_alt", s.guard_alt}};
      emit(j.dump(1), out);
    }
  } catch (const rws::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
