#pragma once

#include <cstdint>

#include "rwsdetect/common.hpp"
#include "rwsdetect/mp_law.hpp"
#include "rwsdetect/sampling.hpp"
#include "rwsdetect/spectrum.hpp"

namespace rws {

/// Log of the proxy likelihood ratio. When
/// (delta n / p)(lambda_1 - 1/(1-delta)) >= 1 the ratio is set to 1.
struct ProxyLR {
  double log_value = 0.0;
  bool guard_triggered = false;
};

/// log b_n(delta, r) = n r delta / (2(1-delta)) - n r^2 delta^2 / (4 p (1-delta)^2).
double log_b(const SpikeParams& params);

/// psi(lambda) = (p / (n delta)) log(1 - (delta n / p)(lambda - 1/(1-delta))).
double psi(double lambda, const SpikeParams& params);

/// Integral of psi against the MP law with gamma = p/n, through log_integral.
/// Requires delta/(1-delta) < sqrt(gamma); throws std::domain_error otherwise.
double psi_integral(const SpikeParams& params);

/// Product form over all p eigenvalues, structural zeros included.
ProxyLR proxy_lr_eigform(const Spectrum& spec, const SpikeParams& params);

/// Linear spectral statistic form. `law` must have gamma = p/n.
ProxyLR proxy_lr_measform(const Spectrum& spec, const SpikeParams& params, const MPLaw& law);

struct CriticalSummary {
  SpikeParams params;
  std::int64_t reps = 0;
  double theta_n = 0.0;  // r delta / sqrt(2 p/n)
  double mean_null = 0.0;
  double var_null = 0.0;
  double mean_alt = 0.0;
  double var_alt = 0.0;
  double se_mean_null = 0.0;
  double se_var_null = 0.0;
  double se_mean_alt = 0.0;
  double se_var_alt = 0.0;
  /// theta_n * T - theta_n^2 / 2 with T the trace statistic.
  double trace_proxy_mean_null = 0.0;
  double trace_proxy_mean_alt = 0.0;
  double corr_null = 0.0;  // correlation between log R and its trace proxy under H0
  std::int64_t guard_null = 0;
  std::int64_t guard_alt = 0;
};

/// log R under H0 (replicate i: derive_seed(seed, i, null)) and under the
/// Gaussian proxy alternative (derive_seed(seed, i, proxy)).
CriticalSummary critical_loglr_experiment(const CriticalCalibration& cal, std::int64_t reps,
                                          std::uint64_t master_seed,
                                          const ParallelOptions& parallel = {});

struct NullRatioMean {
  std::int64_t reps = 0;
  double mean = 0.0;  // empirical E0[R]
  double se = 0.0;
  std::int64_t guard_count = 0;
  bool overflow = false;  // some exp(log R) exceeded the double range and was clamped
};

NullRatioMean null_mean_of_proxy_lr(const SpikeParams& params, std::int64_t reps,
                                    std::uint64_t master_seed,
                                    const ParallelOptions& parallel = {});

}  // namespace rws
