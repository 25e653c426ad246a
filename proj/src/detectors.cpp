#include "rwsdetect/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rwsdetect/sampling.hpp"

namespace rws {

namespace {

void require_match(const Spectrum& spec, const NullCalibration& cal) {
  cal.require_dims(spec.n, spec.p);
  if (cal.size() != spec.size()) {
    throw ConfigError("calibration table length does not match the spectrum");
  }
}

void require_sd(const NullCalibration& cal, const char* what) {
  if (!cal.has_sd()) {
    throw ConfigError(std::string(what) +
                      " needs standard deviations; the calibration is means-only");
  }
}

TestOutcome decide(TestName name, double stat, double threshold,
                   std::optional<std::int64_t> argmax = std::nullopt) {
  return TestOutcome{name, stat, threshold, stat >= threshold, argmax};
}

TestOutcome max_outcome(TestName name, const std::vector<double>& profile, std::size_t limit,
                        double threshold) {
  const std::size_t k = argmax_first(profile, limit);
  return decide(name, profile[k], threshold, static_cast<std::int64_t>(k + 1));
}

// Vector (S_k/lambda_k minus mean) scaled elementwise.
template <typename Scale>
std::vector<double> standardized(const std::vector<double>& values,
                                 const std::vector<double>& mean, Scale scale) {
  std::vector<double> out(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) out[k] = (values[k] - mean[k]) / scale(k);
  return out;
}

}  // namespace

std::string to_string(TestName t) {
  switch (t) {
    case TestName::trace:
      return "trace";
    case TestName::trace2:
      return "trace2";
    case TestName::cs_star:
      return "cs_star";
    case TestName::cs_plus:
      return "cs_plus";
    case TestName::hc_star:
      return "hc_star";
    case TestName::hc_plus:
      return "hc_plus";
    case TestName::tw:
      return "tw";
  }
  return "unknown";
}

TestName test_from_string(const std::string& s) {
  if (s == "trace") return TestName::trace;
  if (s == "trace2") return TestName::trace2;
  if (s == "cs" || s == "cs_star") return TestName::cs_star;
  if (s == "cs+" || s == "cs_plus") return TestName::cs_plus;
  if (s == "hc" || s == "hc_star") return TestName::hc_star;
  if (s == "hc+" || s == "hc_plus") return TestName::hc_plus;
  if (s == "tw") return TestName::tw;
  throw ConfigError("unknown test '" + s + "' (expected trace, trace2, cs, cs+, hc, hc+ or tw)");
}

bool is_max_statistic(TestName t) {
  return t == TestName::cs_star || t == TestName::cs_plus || t == TestName::hc_star ||
         t == TestName::hc_plus;
}

std::size_t argmax_first(const std::vector<double>& v, std::size_t limit) {
  limit = std::min(limit, v.size());
  if (limit == 0) throw ConfigError("argmax over an empty range");
  std::size_t best = 0;
  for (std::size_t k = 1; k < limit; ++k) {
    if (v[k] > v[best]) best = k;
  }
  return best;
}

double trace_statistic(const Spectrum& spec) {
  const double n = static_cast<double>(spec.n);
  const double p = static_cast<double>(spec.p);
  return (n * spec.trace() - n * p) / std::sqrt(2.0 * n * p);
}

TestOutcome trace_test(const Spectrum& spec, double q) {
  if (!(q > 0.0)) throw ConfigError("trace_test: q must be positive");
  if (spec.n < 2) throw ConfigError("trace_test: requires n >= 2");
  const double threshold = std::sqrt(2.0 * q * std::log(static_cast<double>(spec.n)));
  return decide(TestName::trace, trace_statistic(spec), threshold);
}

double trace2_raw(const Spectrum& spec) {
  double s2 = 0.0;
  for (double l : spec.lambda) s2 += (l - 1.0) * (l - 1.0);
  return s2;
}

TestOutcome trace2_test(const Spectrum& spec, const NullCalibration& cal, double z) {
  require_match(spec, cal);
  if (!cal.mean_trace2 || !cal.sd_trace2) {
    throw ConfigError("trace2_test: calibration carries no S^(2) moments");
  }
  const double stat = (trace2_raw(spec) - *cal.mean_trace2) / *cal.sd_trace2;
  return decide(TestName::trace2, stat, z);
}

std::vector<double> cusum_profile(const Spectrum& spec, const NullCalibration& cal) {
  require_match(spec, cal);
  require_sd(cal, "cusum_profile");
  return standardized(spec.cumsum, cal.mean_S, [&](std::size_t k) { return cal.sd_S[k]; });
}

std::vector<double> hc_profile(const Spectrum& spec, const NullCalibration& cal) {
  require_match(spec, cal);
  require_sd(cal, "hc_profile");
  return standardized(spec.lambda, cal.mean_lambda,
                      [&](std::size_t k) { return cal.sd_lambda[k]; });
}

TestOutcome cusum_star(const Spectrum& spec, const NullCalibration& cal, double threshold) {
  const auto profile = cusum_profile(spec, cal);
  return max_outcome(TestName::cs_star, profile, profile.size(), threshold);
}

TestOutcome hc_star(const Spectrum& spec, const NullCalibration& cal, double threshold) {
  const auto profile = hc_profile(spec, cal);
  return max_outcome(TestName::hc_star, profile, profile.size(), threshold);
}

TestOutcome cusum_plus(const Spectrum& spec, const NullCalibration& cal, std::int64_t n) {
  require_match(spec, cal);
  if (n != spec.n) throw ConfigError("cusum_plus: n does not match the spectrum");
  const double threshold = tilde_L(n);
  const double nd = static_cast<double>(n);
  const auto profile = standardized(spec.cumsum, cal.mean_S, [&](std::size_t k) {
    return std::pow(static_cast<double>(k + 1) / nd, 2.0 / 3.0);
  });
  return max_outcome(TestName::cs_plus, profile, profile.size(), threshold);
}

TestOutcome hc_plus(const Spectrum& spec, const NullCalibration& cal, std::int64_t n,
                    double edge_fraction) {
  require_match(spec, cal);
  if (n != spec.n) throw ConfigError("hc_plus: n does not match the spectrum");
  if (!(edge_fraction >= 0.0 && edge_fraction < 1.0)) {
    throw ConfigError("hc_plus: edge_fraction must lie in [0, 1)");
  }
  const double threshold = tilde_L(n);
  const double nd = static_cast<double>(n);
  const auto profile = standardized(spec.lambda, cal.mean_lambda, [&](std::size_t k) {
    const double kk = static_cast<double>(k + 1);
    const double tilde_k = std::min(kk, nd + 1.0 - kk);
    return std::pow(nd, -2.0 / 3.0) * std::pow(tilde_k, -1.0 / 3.0);
  });
  std::size_t limit = profile.size();
  if (spec.p == spec.n) {
    // hard edge at zero: the smallest eigenvalues are excluded
    limit = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor((1.0 - edge_fraction) * nd)));
  }
  return max_outcome(TestName::hc_plus, profile, limit, threshold);
}

TestOutcome tw_test(const Spectrum& spec, const NullCalibration& cal, std::int64_t n) {
  require_match(spec, cal);
  require_sd(cal, "tw_test");
  if (n != spec.n) throw ConfigError("tw_test: n does not match the spectrum");
  const double stat = (spec.lambda[0] - cal.mean_lambda[0]) / cal.sd_lambda[0];
  return decide(TestName::tw, stat, tw_threshold(n));
}

double upper_quantile(std::vector<double> values, double level) {
  if (values.empty()) throw ConfigError("upper_quantile: no values");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("upper_quantile: level must lie in (0, 1)");
  const auto count = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - level) * count - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   values.end());
  return values[rank - 1];
}

NullQuantileThresholds null_quantile_thresholds(const NullCalibration& cal, std::int64_t reps,
                                                std::uint64_t seed, double level,
                                                const ParallelOptions& parallel) {
  if (reps < 1) throw ConfigError("null_quantile_thresholds: reps must be >= 1");
  require_sd(cal, "null_quantile_thresholds");
  const auto count = static_cast<std::size_t>(reps);
  std::vector<double> cs(count), hc(count), t2(count);
  const bool with_trace2 = cal.mean_trace2 && cal.sd_trace2;
  parallel_for(count, parallel, [&](std::size_t i) {
    const auto s = derive_seed(seed, i, Hypothesis::null);
    const Spectrum spec = eigenvalues(sample_null(cal.n, cal.p, s));
    const auto cp = cusum_profile(spec, cal);
    const auto hp = hc_profile(spec, cal);
    cs[i] = *std::max_element(cp.begin(), cp.end());
    hc[i] = *std::max_element(hp.begin(), hp.end());
    t2[i] = with_trace2 ? (trace2_raw(spec) - *cal.mean_trace2) / *cal.sd_trace2 : 0.0;
  });
  NullQuantileThresholds out;
  out.level = level;
  out.reps = reps;
  out.seed = seed;
  out.cs_star = upper_quantile(cs, level);
  out.hc_star = upper_quantile(hc, level);
  out.trace2 = with_trace2 ? upper_quantile(t2, level) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

TestOutcome run_test(TestName name, const Spectrum& spec, const NullCalibration& cal,
                     const DetectorSettings& settings) {
  auto starred = [&]() -> const NullQuantileThresholds& {
    if (!settings.starred) {
      throw ConfigError(to_string(name) + " needs a threshold policy (null quantiles)");
    }
    return *settings.starred;
  };
  switch (name) {
    case TestName::trace:
      return trace_test(spec, settings.trace_q);
    case TestName::trace2:
      return trace2_test(spec, cal, settings.trace2_z);
    case TestName::cs_star:
      return cusum_star(spec, cal, starred().cs_star);
    case TestName::cs_plus:
      return cusum_plus(spec, cal, spec.n);
    case TestName::hc_star:
      return hc_star(spec, cal, starred().hc_star);
    case TestName::hc_plus:
      return hc_plus(spec, cal, spec.n, settings.hc_edge_fraction);
    case TestName::tw:
      return tw_test(spec, cal, spec.n);
  }
  throw ConfigError("unknown test");
}

}  // namespace rws
