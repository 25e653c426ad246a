#include "rwsdetect/experiments.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <utility>

#include "rwsdetect/mp_law.hpp"
#include "rwsdetect/spectrum.hpp"

namespace rws {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double mean_of(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sd_of(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

bool needs_sd(TestName t) {
  return t == TestName::cs_star || t == TestName::hc_star || t == TestName::tw;
}

bool needs_calibration(TestName t) { return t != TestName::trace; }

void check_calibration(const std::vector<TestName>& tests, const NullCalibration* cal,
                       std::int64_t n, std::int64_t p) {
  for (TestName t : tests) {
    if (!needs_calibration(t)) continue;
    if (cal == nullptr) {
      throw ConfigError("a null calibration for (n, p) is required by test " + to_string(t));
    }
    cal->require_dims(n, p);
    if (needs_sd(t) && !cal->has_sd()) {
      throw ConfigError("test " + to_string(t) + " needs a calibration with standard deviations");
    }
    if (t == TestName::trace2 && !cal->mean_trace2) {
      throw ConfigError("test trace2 needs calibration moments of S^(2)");
    }
  }
}

// Threshold-free value of each statistic; larger means more evidence against H0.
double statistic_value(TestName t, const Spectrum& spec, const NullCalibration* cal) {
  switch (t) {
    case TestName::trace:
      return trace_statistic(spec);
    case TestName::trace2:
      return (trace2_raw(spec) - *cal->mean_trace2) / cal->sd_trace2.value_or(1.0);
    case TestName::cs_star: {
      const auto v = cusum_profile(spec, *cal);
      return *std::max_element(v.begin(), v.end());
    }
    case TestName::hc_star: {
      const auto v = hc_profile(spec, *cal);
      return *std::max_element(v.begin(), v.end());
    }
    case TestName::cs_plus:
      return cusum_plus(spec, *cal, spec.n).statistic;
    case TestName::hc_plus:
      return hc_plus(spec, *cal, spec.n).statistic;
    case TestName::tw:
      return (spec.lambda[0] - cal->mean_lambda[0]) / cal->sd_lambda[0];
  }
  return 0.0;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json params_json(const SpikeParams& s) {
  return json{{"n", s.n}, {"p", s.p}, {"r", s.r}, {"delta", s.delta},
              {"delta_excess", s.spike_excess()}};
}

json summary_json(const QuantileSummary& q) {
  return json{{"median", q.median}, {"q90", q.q90}, {"q99", q.q99}, {"max", q.max}};
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

ThresholdScan ideal_error_from_values(const std::vector<double>& null_values,
                                      const std::vector<double>& alt_values) {
  if (null_values.empty() || alt_values.empty()) {
    throw ConfigError("ideal error: both samples must be non-empty");
  }
  std::vector<std::pair<double, bool>> all;  // (value, is_alternative)
  all.reserve(null_values.size() + alt_values.size());
  for (double v : null_values) all.emplace_back(v, false);
  for (double v : alt_values) all.emplace_back(v, true);
  for (const auto& [v, label] : all) {
    if (std::isnan(v)) throw NumericError("ideal error: NaN statistic");
  }
  std::sort(all.begin(), all.end());

  const auto n0 = static_cast<std::int64_t>(null_values.size());
  const auto n1 = static_cast<std::int64_t>(alt_values.size());
  const double w0 = 1.0 / static_cast<double>(n0);
  const double w1 = 1.0 / static_cast<double>(n1);

  // threshold -inf: every dataset rejected
  std::int64_t fp = n0;
  std::int64_t fn = 0;
  ThresholdScan best{static_cast<double>(fp) * w0, -kInf, fp, fn};
  std::size_t i = 0;
  while (i < all.size()) {
    const double x = all[i].first;
    std::size_t j = i;
    while (j < all.size() && all[j].first == x) {
      if (all[j].second) {
        ++fn;
      } else {
        --fp;
      }
      ++j;
    }
    const double threshold = j < all.size() ? x + 0.5 * (all[j].first - x) : kInf;
    const double err = static_cast<double>(fp) * w0 + static_cast<double>(fn) * w1;
    if (err < best.error) best = ThresholdScan{err, threshold, fp, fn};
    i = j;
  }
  return best;
}

double error_at_threshold(const std::vector<double>& null_values,
                          const std::vector<double>& alt_values, double threshold) {
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  for (double v : null_values) fp += v > threshold ? 1 : 0;
  for (double v : alt_values) fn += v > threshold ? 0 : 1;
  return static_cast<double>(fp) / static_cast<double>(null_values.size()) +
         static_cast<double>(fn) / static_cast<double>(alt_values.size());
}

const TestErrorSummary& IdealErrorReport::get(TestName t) const {
  for (const auto& s : tests) {
    if (s.test == t) return s;
  }
  throw ConfigError("report has no entry for test " + to_string(t));
}

IdealErrorReport ideal_error(const IdealErrorConfig& config, const std::vector<TestName>& tests,
                             std::uint64_t master_seed, const NullCalibration& cal,
                             const ParallelOptions& parallel) {
  if (config.reps_per_side < 1 || config.repetitions < 1) {
    throw ConfigError("ideal error: reps_per_side and repetitions must be >= 1");
  }
  if (tests.empty()) throw ConfigError("ideal error: no tests requested");
  const SpikeParams params = config.params();
  params.validate();
  check_calibration(tests, &cal, config.n, config.p);

  const auto per_side = static_cast<std::size_t>(config.reps_per_side);
  const std::size_t m = cal.size();
  const bool want_hc =
      std::find(tests.begin(), tests.end(), TestName::hc_star) != tests.end();
  const bool want_cs =
      std::find(tests.begin(), tests.end(), TestName::cs_star) != tests.end();

  IdealErrorReport report;
  report.config = config;
  report.master_seed = master_seed;
  report.tests.resize(tests.size());
  for (std::size_t t = 0; t < tests.size(); ++t) report.tests[t].test = tests[t];
  std::vector<std::vector<double>> khat(tests.size()), khat_err(tests.size());
  std::vector<double> shift_sum(m, 0.0);

  for (std::int64_t rep = 0; rep < config.repetitions; ++rep) {
    const auto stream = static_cast<std::uint64_t>(rep);
    // slot i < per_side: null dataset i; otherwise alternative dataset i - per_side
    std::vector<std::vector<double>> values(2 * per_side);
    std::vector<std::vector<double>> hc(want_hc ? 2 * per_side : 0);
    std::vector<std::vector<double>> cs(want_cs ? 2 * per_side : 0);
    std::vector<std::vector<double>> lambda(per_side);
    parallel_for(2 * per_side, parallel, [&](std::size_t i) {
      const bool alt = i >= per_side;
      const std::size_t idx = alt ? i - per_side : i;
      const Hypothesis h = alt ? Hypothesis::rws : Hypothesis::null;
      const auto seed = derive_seed(master_seed, stream, idx, h);
      const Spectrum spec =
          eigenvalues(alt ? sample_rws(params, seed) : sample_null(config.n, config.p, seed));
      values[i].resize(tests.size());
      for (std::size_t t = 0; t < tests.size(); ++t) {
        values[i][t] = statistic_value(tests[t], spec, &cal);
      }
      if (want_hc) hc[i] = hc_profile(spec, cal);
      if (want_cs) cs[i] = cusum_profile(spec, cal);
      if (alt) lambda[idx] = spec.lambda;
    });

    for (const auto& l : lambda) {
      for (std::size_t k = 0; k < m; ++k) shift_sum[k] += l[k];
    }

    std::vector<double> null_v(per_side), alt_v(per_side);
    auto column = [&](auto&& get) {
      for (std::size_t i = 0; i < per_side; ++i) {
        null_v[i] = get(i);
        alt_v[i] = get(i + per_side);
      }
    };
    for (std::size_t t = 0; t < tests.size(); ++t) {
      column([&](std::size_t i) { return values[i][t]; });
      report.tests[t].errors.push_back(ideal_error_from_values(null_v, alt_v).error);

      const TestName name = tests[t];
      if (name != TestName::hc_star && name != TestName::cs_star) continue;
      const auto& profiles = name == TestName::hc_star ? hc : cs;
      double best_err = kInf;
      std::size_t best_k = 0;
      for (std::size_t k = 0; k < m; ++k) {
        column([&](std::size_t i) { return profiles[i][k]; });
        const double err = ideal_error_from_values(null_v, alt_v).error;
        if (err < best_err) {
          best_err = err;
          best_k = k;
        }
      }
      khat[t].push_back(static_cast<double>(best_k + 1));
      khat_err[t].push_back(best_err);
    }
  }

  for (std::size_t t = 0; t < tests.size(); ++t) {
    auto& s = report.tests[t];
    s.mean_error = mean_of(s.errors);
    s.sd_error = sd_of(s.errors);
    if (!khat[t].empty()) {
      s.mean_argmax = mean_of(khat[t]);
      s.sd_argmax = sd_of(khat[t]);
      s.mean_error_at_argmax = mean_of(khat_err[t]);
    }
  }
  const double total = static_cast<double>(config.repetitions) * static_cast<double>(per_side);
  report.mean_shift.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    report.mean_shift[k] = shift_sum[k] / total - cal.mean_lambda[k];
  }
  return report;
}

const PointRisk& PhasePoint::get(TestName t) const {
  for (const auto& r : risks) {
    if (r.test == t) return r;
  }
  throw ConfigError("phase point has no entry for test " + to_string(t));
}

double boundary_detectable(double beta) { return 1.0 - beta; }

double boundary_tw(double beta) { return std::max(1.0 - 1.25 * beta, 0.5 * (1.0 - beta)); }

PhaseSweepReport phase_sweep(const PhaseSweepConfig& config, std::uint64_t master_seed,
                             const NullCalibration* cal, const ParallelOptions& parallel) {
  if (config.n < 16) throw ConfigError("phase sweep: n must be >= 16");
  if (config.reps < 1) throw ConfigError("phase sweep: reps must be >= 1");
  if (config.tests.empty()) throw ConfigError("phase sweep: no tests requested");
  if (!(config.gamma >= 1.0)) throw ConfigError("phase sweep: gamma must be >= 1");
  const std::int64_t n = config.n;
  const auto p = static_cast<std::int64_t>(std::llround(config.gamma * static_cast<double>(n)));
  check_calibration(config.tests, cal, n, p);

  const auto& tests = config.tests;
  const std::size_t nt = tests.size();
  const auto reps = static_cast<std::size_t>(config.reps);

  // thresholds
  std::vector<double> threshold(nt);
  std::optional<NullQuantileThresholds> starred;
  for (std::size_t t = 0; t < nt; ++t) {
    const TestName name = tests[t];
    if ((name == TestName::cs_star || name == TestName::hc_star || name == TestName::trace2) &&
        !starred) {
      const std::int64_t qreps = config.threshold_reps > 0 ? config.threshold_reps : config.reps;
      starred = null_quantile_thresholds(*cal, qreps, mix64(master_seed ^ 0x7468726573686f6cULL),
                                         config.level, parallel);
    }
    switch (name) {
      case TestName::trace:
        threshold[t] = std::sqrt(2.0 * config.trace_q * std::log(static_cast<double>(n)));
        break;
      case TestName::trace2:
        threshold[t] = starred->trace2;
        break;
      case TestName::cs_star:
        threshold[t] = starred->cs_star;
        break;
      case TestName::hc_star:
        threshold[t] = starred->hc_star;
        break;
      case TestName::cs_plus:
      case TestName::hc_plus:
        threshold[t] = tilde_L(n);
        break;
      case TestName::tw:
        threshold[t] = tw_threshold(n);
        break;
    }
  }

  auto evaluate = [&](std::size_t count, const std::function<DataMatrix(std::size_t)>& draw) {
    std::vector<std::vector<double>> out(count);
    parallel_for(count, parallel, [&](std::size_t i) {
      const Spectrum spec = eigenvalues(draw(i));
      out[i].resize(nt);
      for (std::size_t t = 0; t < nt; ++t) out[i][t] = statistic_value(tests[t], spec, cal);
    });
    return out;
  };

  const auto null_stats = evaluate(reps, [&](std::size_t i) {
    return sample_null(n, p, derive_seed(master_seed, 0, i, Hypothesis::null));
  });
  std::vector<double> type1(nt, 0.0);
  for (std::size_t t = 0; t < nt; ++t) {
    std::int64_t count = 0;
    for (const auto& row : null_stats) count += row[t] >= threshold[t] ? 1 : 0;
    type1[t] = static_cast<double>(count) / static_cast<double>(reps);
  }

  PhaseSweepReport report;
  report.config = config;
  report.master_seed = master_seed;
  report.p = p;
  std::uint64_t stream = 1;
  for (double beta : config.beta_grid) {
    for (double alpha : config.alpha_grid) {
      PhasePoint point;
      point.alpha = alpha;
      point.beta = beta;
      const std::uint64_t this_stream = stream++;
      try {
        point.params = calibrate(AsymptoticCalibration{alpha, beta, config.gamma, n});
      } catch (const ConfigError& e) {
        point.skipped = true;
        point.note = e.what();
        report.points.push_back(std::move(point));
        continue;
      }
      const SpikeParams params = point.params;
      const auto alt_stats = evaluate(reps, [&](std::size_t i) {
        return sample_rws(params, derive_seed(master_seed, this_stream, i, Hypothesis::rws));
      });
      for (std::size_t t = 0; t < nt; ++t) {
        std::int64_t miss = 0;
        for (const auto& row : alt_stats) miss += row[t] >= threshold[t] ? 0 : 1;
        PointRisk r;
        r.test = tests[t];
        r.type1 = type1[t];
        r.type2 = static_cast<double>(miss) / static_cast<double>(reps);
        r.risk = r.type1 + r.type2;
        r.threshold = threshold[t];
        point.risks.push_back(r);
      }
      report.points.push_back(std::move(point));
    }
  }
  return report;
}

QuantileSummary summarize(std::vector<double> values) {
  if (values.empty()) return {};
  std::sort(values.begin(), values.end());
  auto at = [&](double q) {
    const auto idx = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(values.size())) - 1.0);
    return values[std::min(idx, values.size() - 1)];
  };
  return QuantileSummary{at(0.5), at(0.9), at(0.99), values.back()};
}

RigidityReport rigidity_audit(const RigidityConfig& config, std::uint64_t master_seed,
                              const NullCalibration& cal, const ParallelOptions& parallel) {
  if (config.reps < 1) throw ConfigError("rigidity audit: reps must be >= 1");
  cal.require_dims(config.n, config.p);
  std::optional<SpikeParams> params = config.params;
  if (config.hypothesis == Hypothesis::rws) {
    if (!params) throw ConfigError("rigidity audit: the rws hypothesis needs spike parameters");
    params->validate();
    if (params->n != config.n || params->p != config.p) {
      throw ConfigError("rigidity audit: spike parameters do not match (n, p)");
    }
  } else if (config.hypothesis != Hypothesis::null) {
    throw ConfigError("rigidity audit: hypothesis must be null or rws");
  }

  const std::int64_t n = config.n;
  const double nd = static_cast<double>(n);
  const std::size_t m = cal.size();
  const QuantileTable q = quantiles(MPLaw::for_dims(n, config.p), n, config.p);
  std::vector<double> cs_scale(m), hc_scale(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double kk = static_cast<double>(k + 1);
    cs_scale[k] = std::pow(kk / nd, 2.0 / 3.0);
    hc_scale[k] = std::pow(nd, -2.0 / 3.0) * std::pow(std::min(kk, nd + 1.0 - kk), -1.0 / 3.0);
  }

  const auto reps = static_cast<std::size_t>(config.reps);
  RigidityReport report;
  report.config = config;
  report.master_seed = master_seed;
  report.tilde_L = tilde_L(n);
  report.quantile_bound = 10.0 * std::log(nd) * std::log(nd);
  report.cs_deviation.resize(reps);
  report.hc_deviation.resize(reps);
  report.quantile_deviation.resize(reps);
  report.k1_deviation.resize(reps);
  parallel_for(reps, parallel, [&](std::size_t i) {
    const auto seed = derive_seed(master_seed, i, config.hypothesis);
    const Spectrum spec = eigenvalues(config.hypothesis == Hypothesis::rws
                                          ? sample_rws(*params, seed)
                                          : sample_null(n, config.p, seed));
    double cs = 0.0, hc = 0.0, qd = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      cs = std::max(cs, std::abs(spec.cumsum[k] - cal.mean_S[k]) / cs_scale[k]);
      hc = std::max(hc, std::abs(spec.lambda[k] - cal.mean_lambda[k]) / hc_scale[k]);
      qd = std::max(qd, std::abs(spec.lambda[k] - q.q[k]) / hc_scale[k]);
    }
    report.cs_deviation[i] = cs;
    report.hc_deviation[i] = hc;
    report.quantile_deviation[i] = qd;
    report.k1_deviation[i] = std::abs(spec.lambda[0] - cal.mean_lambda[0]) * std::pow(nd, 2.0 / 3.0);
  });

  auto fraction_above = [&](const std::vector<double>& v, double bound) {
    const auto c = std::count_if(v.begin(), v.end(), [&](double x) { return x > bound; });
    return static_cast<double>(c) / static_cast<double>(v.size());
  };
  report.cs_summary = summarize(report.cs_deviation);
  report.hc_summary = summarize(report.hc_deviation);
  report.quantile_summary = summarize(report.quantile_deviation);
  report.k1_summary = summarize(report.k1_deviation);
  report.cs_exceed_fraction = fraction_above(report.cs_deviation, report.tilde_L);
  report.hc_exceed_fraction = fraction_above(report.hc_deviation, report.tilde_L);
  report.quantile_exceed_fraction = fraction_above(report.quantile_deviation, report.quantile_bound);
  return report;
}

std::string to_json_string(const IdealErrorReport& report) {
  const auto& c = report.config;
  json doc;
  doc["kind"] = "ideal_error";
  doc["master_seed"] = report.master_seed;
  doc["config"] = {{"n", c.n},
                   {"p", c.p},
                   {"r", c.r},
                   {"delta_excess", c.delta_excess},
                   {"reps_per_side", c.reps_per_side},
                   {"repetitions", c.repetitions}};
  doc["error_definition"] = "false_positives/null_count + false_negatives/alt_count";
  json tests = json::array();
  for (const auto& s : report.tests) {
    json t{{"test", to_string(s.test)},
           {"mean_error", s.mean_error},
           {"sd_error", s.sd_error},
           {"errors", s.errors}};
    if (s.mean_argmax) {
      t["mean_argmax"] = *s.mean_argmax;
      t["sd_argmax"] = *s.sd_argmax;
      t["mean_error_at_argmax"] = *s.mean_error_at_argmax;
    }
    tests.push_back(std::move(t));
  }
  doc["tests"] = std::move(tests);
  doc["mean_shift"] = report.mean_shift;
  return doc.dump(1);
}

std::string to_json_string(const PhaseSweepReport& report) {
  const auto& c = report.config;
  json doc;
  doc["kind"] = "phase_sweep";
  doc["master_seed"] = report.master_seed;
  json tests = json::array();
  for (TestName t : c.tests) tests.push_back(to_string(t));
  doc["config"] = {{"alpha_grid", c.alpha_grid}, {"beta_grid", c.beta_grid},
                   {"gamma", c.gamma},           {"n", c.n},
                   {"p", report.p},              {"reps", c.reps},
                   {"tests", tests},             {"trace_q", c.trace_q},
                   {"level", c.level},           {"threshold_reps", c.threshold_reps}};
  json points = json::array();
  for (const auto& pt : report.points) {
    json j{{"alpha", pt.alpha}, {"beta", pt.beta}, {"skipped", pt.skipped}};
    if (pt.skipped) {
      j["note"] = pt.note;
    } else {
      j["params"] = params_json(pt.params);
      json risks = json::object();
      for (const auto& r : pt.risks) {
        risks[to_string(r.test)] = {{"type1", r.type1},
                                    {"type2", r.type2},
                                    {"risk", r.risk},
                                    {"threshold", number_or_null(r.threshold)}};
      }
      j["risks"] = std::move(risks);
    }
    points.push_back(std::move(j));
  }
  doc["points"] = std::move(points);
  json boundary = json::array();
  for (double beta : c.beta_grid) {
    boundary.push_back({{"beta", beta},
                        {"alpha_detectable", boundary_detectable(beta)},
                        {"alpha_tw", boundary_tw(beta)}});
  }
  doc["boundary"] = std::move(boundary);
  return doc.dump(1);
}

std::string to_json_string(const RigidityReport& report) {
  const auto& c = report.config;
  json doc;
  doc["kind"] = "rigidity_audit";
  doc["master_seed"] = report.master_seed;
  doc["config"] = {{"n", c.n}, {"p", c.p}, {"reps", c.reps},
                   {"hypothesis", to_string(c.hypothesis)}};
  if (c.params) doc["config"]["params"] = params_json(*c.params);
  doc["tilde_L"] = report.tilde_L;
  doc["quantile_bound"] = report.quantile_bound;
  doc["cs"] = {{"summary", summary_json(report.cs_summary)},
               {"exceed_fraction", report.cs_exceed_fraction}};
  doc["hc"] = {{"summary", summary_json(report.hc_summary)},
               {"exceed_fraction", report.hc_exceed_fraction}};
  doc["quantile"] = {{"summary", summary_json(report.quantile_summary)},
                     {"exceed_fraction", report.quantile_exceed_fraction}};
  doc["k1"] = {{"summary", summary_json(report.k1_summary)}};
  return doc.dump(1);
}

void write_csv(std::ostream& out, const IdealErrorReport& report) {
  out << "test,mean_error,sd_error,mean_argmax,sd_argmax,mean_error_at_argmax\n";
  for (const auto& s : report.tests) {
    out << to_string(s.test) << ',' << fmt(s.mean_error) << ',' << fmt(s.sd_error) << ','
        << (s.mean_argmax ? fmt(*s.mean_argmax) : "") << ','
        << (s.sd_argmax ? fmt(*s.sd_argmax) : "") << ','
        << (s.mean_error_at_argmax ? fmt(*s.mean_error_at_argmax) : "") << '\n';
  }
}

void write_csv(std::ostream& out, const PhaseSweepReport& report) {
  out << "alpha,beta,r,delta,test,type1,type2,risk\n";
  for (const auto& pt : report.points) {
    if (pt.skipped) continue;
    for (const auto& r : pt.risks) {
      out << fmt(pt.alpha) << ',' << fmt(pt.beta) << ',' << pt.params.r << ','
          << fmt(pt.params.delta) << ',' << to_string(r.test) << ',' << fmt(r.type1) << ','
          << fmt(r.type2) << ',' << fmt(r.risk) << '\n';
    }
  }
}

void write_csv(std::ostream& out, const RigidityReport& report) {
  out << "replicate,cs_deviation,hc_deviation,quantile_deviation,k1_deviation\n";
  for (std::size_t i = 0; i < report.cs_deviation.size(); ++i) {
    out << i << ',' << fmt(report.cs_deviation[i]) << ',' << fmt(report.hc_deviation[i]) << ','
        << fmt(report.quantile_deviation[i]) << ',' << fmt(report.k1_deviation[i]) << '\n';
  }
}

void write_gnuplot(const std::filesystem::path& stem, const PhaseSweepReport& report) {
  auto with_suffix = [&](const std::string& suffix) {
    return std::filesystem::path(stem.string() + suffix);
  };
  const auto dat = with_suffix(".dat");
  const auto bnd = with_suffix("_boundary.dat");
  const auto gp = with_suffix(".gp");
  {
    std::ofstream out(dat);
    if (!out) throw ConfigError("cannot write '" + dat.string() + "'");
    out << "# alpha beta";
    for (TestName t : report.config.tests) out << ' ' << to_string(t);
    out << '\n';
    double last_beta = std::numeric_limits<double>::quiet_NaN();
    for (const auto& pt : report.points) {
      if (pt.skipped) continue;
      if (!std::isnan(last_beta) && pt.beta != last_beta) out << '\n';
      last_beta = pt.beta;
      out << fmt(pt.alpha) << ' ' << fmt(pt.beta);
      for (const auto& r : pt.risks) out << ' ' << fmt(r.risk);
      out << '\n';
    }
  }
  {
    std::ofstream out(bnd);
    if (!out) throw ConfigError("cannot write '" + bnd.string() + "'");
    out << "# beta alpha_detectable alpha_tw\n";
    constexpr int kSteps = 100;
    for (int i = 0; i <= kSteps; ++i) {
      const double beta = static_cast<double>(i) / kSteps;
      out << fmt(beta) << ' ' << fmt(boundary_detectable(beta)) << ' ' << fmt(boundary_tw(beta))
          << '\n';
    }
  }
  std::ofstream out(gp);
  if (!out) throw ConfigError("cannot write '" + gp.string() + "'");
  out << "set xlabel 'beta'\nset ylabel 'alpha'\nset xrange [0:1]\nset yrange [0:1]\n"
      << "set cbrange [0:2]\nset palette defined (0 'white', 2 'black')\n";
  std::size_t column = 3;
  for (TestName t : report.config.tests) {
    const std::string name = to_string(t);
    out << "set terminal pngcairo size 640,560\n"
        << "set output '" << stem.filename().string() << '_' << name << ".png'\n"
        << "set title 'risk: " << name << "'\n"
        << "plot '" << dat.filename().string() << "' using 2:1:" << column
        << " with points pt 5 ps 2 palette notitle, \\\n"
        << "     '" << bnd.filename().string() << "' using 1:2 with lines lw 2 title 'alpha = 1 - beta', \\\n"
        << "     '" << bnd.filename().string() << "' using 1:3 with lines lw 2 dt 2 title 'TW boundary'\n";
    ++column;
  }
}

}  // namespace rws
