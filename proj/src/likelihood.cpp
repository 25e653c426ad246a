#include "rwsdetect/likelihood.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "rwsdetect/detectors.hpp"

namespace rws {

namespace {

double ratio(const SpikeParams& params) {
  return static_cast<double>(params.p) / static_cast<double>(params.n);
}

// (delta n / p)(lambda_1 - 1/(1-delta)) >= 1
bool guard_fires(const Spectrum& spec, const SpikeParams& params) {
  if (spec.lambda.empty()) return false;
  const double g = ratio(params);
  return (params.delta / g) * (spec.lambda[0] - params.spiked_eigenvalue()) >= 1.0;
}

void check_inputs(const Spectrum& spec, const SpikeParams& params) {
  params.validate();
  if (spec.n != params.n || spec.p != params.p) {
    throw ConfigError("proxy likelihood: spectrum dimensions do not match the parameters");
  }
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
  double se_mean = 0.0;
  double se_var = 0.0;
};

Moments moments(const std::vector<double>& x) {
  const auto count = static_cast<double>(x.size());
  Moments m;
  for (double v : x) m.mean += v;
  m.mean /= count;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : x) {
    const double d = (v - m.mean) * (v - m.mean);
    m2 += d;
    m4 += d * d;
  }
  m.var = m2 / (count - 1.0);
  m.se_mean = std::sqrt(m.var / count);
  const double mu2 = m2 / count;
  m.se_var = std::sqrt(std::max(m4 / count - mu2 * mu2, 0.0) / count);
  return m;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  double c = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) c += (a[i] - ma.mean) * (b[i] - mb.mean);
  c /= static_cast<double>(a.size()) - 1.0;
  const double denom = std::sqrt(ma.var * mb.var);
  return denom > 0.0 ? c / denom : 0.0;
}

}  // namespace

double log_b(const SpikeParams& params) {
  const double n = static_cast<double>(params.n);
  const double p = static_cast<double>(params.p);
  const double r = static_cast<double>(params.r);
  const double d = params.delta;
  return n * r * d / (2.0 * (1.0 - d)) - n * r * r * d * d / (4.0 * p * (1.0 - d) * (1.0 - d));
}

double psi(double lambda, const SpikeParams& params) {
  const double g = ratio(params);
  const double d = params.delta;
  return (g / d) * std::log1p(-(d / g) * (lambda - params.spiked_eigenvalue()));
}

double psi_integral(const SpikeParams& params) {
  const double g = ratio(params);
  const double d = params.delta;
  const double t = g / d + params.spiked_eigenvalue();
  if (!(params.spike_excess() < std::sqrt(g))) {
    std::ostringstream msg;
    msg << "psi_integral: spike excess " << params.spike_excess()
        << " must be below sqrt(p/n) = " << std::sqrt(g);
    throw std::domain_error(msg.str());
  }
  return (g / d) * (std::log(d / g) + log_integral(g, t));
}

ProxyLR proxy_lr_eigform(const Spectrum& spec, const SpikeParams& params) {
  check_inputs(spec, params);
  if (params.r == 0) return {};
  if (guard_fires(spec, params)) return {0.0, true};
  const double n = static_cast<double>(params.n);
  const double r = static_cast<double>(params.r);
  const double d = params.delta;
  const double c = d / ratio(params);
  const double top = params.spiked_eigenvalue();
  double sum = 0.0;
  for (double l : spec.lambda) sum += std::log1p(-c * (l - top));
  const auto zeros = static_cast<double>(params.p - static_cast<std::int64_t>(spec.size()));
  if (zeros > 0.0) sum += zeros * std::log1p(c * top);
  const double value = 0.5 * n * r * std::log1p(-d) + log_b(params) - 0.5 * r * sum;
  return {value, false};
}

ProxyLR proxy_lr_measform(const Spectrum& spec, const SpikeParams& params, const MPLaw& law) {
  check_inputs(spec, params);
  if (std::abs(law.gamma() - ratio(params)) > 1e-12 * ratio(params)) {
    throw ConfigError("proxy_lr_measform: law gamma differs from p/n");
  }
  if (params.r == 0) return {};
  if (guard_fires(spec, params)) return {0.0, true};
  const double n = static_cast<double>(params.n);
  const double p = static_cast<double>(params.p);
  const double r = static_cast<double>(params.r);
  const double d = params.delta;
  double empirical = 0.0;
  for (double l : spec.lambda) empirical += psi(l, params);
  const auto zeros = static_cast<double>(params.p - static_cast<std::int64_t>(spec.size()));
  if (zeros > 0.0) empirical += zeros * psi(0.0, params);
  empirical /= p;
  const double value = -n * r * r * d * d / (4.0 * p * (1.0 - d) * (1.0 - d)) -
                       0.5 * n * r * d * (empirical - psi_integral(params));
  return {value, false};
}

CriticalSummary critical_loglr_experiment(const CriticalCalibration& cal, std::int64_t reps,
                                          std::uint64_t master_seed,
                                          const ParallelOptions& parallel) {
  if (reps < 2) throw ConfigError("critical experiment: reps must be >= 2");
  const SpikeParams params = calibrate(cal);
  const auto count = static_cast<std::size_t>(reps);
  const double theta_n =
      static_cast<double>(params.r) * params.delta / std::sqrt(2.0 * ratio(params));

  std::vector<double> lr0(count), lr1(count), tp0(count), tp1(count);
  std::vector<char> g0(count), g1(count);
  auto run = [&](Hypothesis h, std::vector<double>& lr, std::vector<double>& tp,
                 std::vector<char>& guard) {
    parallel_for(count, parallel, [&](std::size_t i) {
      const auto seed = derive_seed(master_seed, i, h);
      const Spectrum spec = eigenvalues(sample(h, params, seed));
      const ProxyLR v = proxy_lr_eigform(spec, params);
      lr[i] = v.log_value;
      guard[i] = v.guard_triggered ? 1 : 0;
      tp[i] = theta_n * trace_statistic(spec) - 0.5 * theta_n * theta_n;
    });
  };
  run(Hypothesis::null, lr0, tp0, g0);
  run(Hypothesis::proxy, lr1, tp1, g1);

  CriticalSummary s;
  s.params = params;
  s.reps = reps;
  s.theta_n = theta_n;
  const Moments m0 = moments(lr0);
  const Moments m1 = moments(lr1);
  s.mean_null = m0.mean;
  s.var_null = m0.var;
  s.se_mean_null = m0.se_mean;
  s.se_var_null = m0.se_var;
  s.mean_alt = m1.mean;
  s.var_alt = m1.var;
  s.se_mean_alt = m1.se_mean;
  s.se_var_alt = m1.se_var;
  s.trace_proxy_mean_null = moments(tp0).mean;
  s.trace_proxy_mean_alt = moments(tp1).mean;
  s.corr_null = correlation(lr0, tp0);
  for (std::size_t i = 0; i < count; ++i) {
    s.guard_null += g0[i];
    s.guard_alt += g1[i];
  }
  return s;
}

NullRatioMean null_mean_of_proxy_lr(const SpikeParams& params, std::int64_t reps,
                                    std::uint64_t master_seed, const ParallelOptions& parallel) {
  if (reps < 2) throw ConfigError("null_mean_of_proxy_lr: reps must be >= 2");
  params.validate();
  const auto count = static_cast<std::size_t>(reps);
  std::vector<double> ratio_values(count);
  std::vector<char> guard(count), clamped(count);
  const double cap = std::log(std::numeric_limits<double>::max());
  parallel_for(count, parallel, [&](std::size_t i) {
    const auto seed = derive_seed(master_seed, i, Hypothesis::null);
    const ProxyLR v = proxy_lr_eigform(eigenvalues(sample_null(params.n, params.p, seed)), params);
    guard[i] = v.guard_triggered ? 1 : 0;
    clamped[i] = v.log_value > cap ? 1 : 0;
    ratio_values[i] = std::exp(std::min(v.log_value, cap));
  });
  NullRatioMean out;
  out.reps = reps;
  const Moments m = moments(ratio_values);
  out.mean = m.mean;
  out.se = m.se_mean;
  for (std::size_t i = 0; i < count; ++i) {
    out.guard_count += guard[i];
    out.overflow = out.overflow || clamped[i] != 0;
  }
  return out;
}

}  // namespace rws
