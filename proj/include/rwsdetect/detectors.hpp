#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rwsdetect/calibration.hpp"
#include "rwsdetect/common.hpp"
#include "rwsdetect/spectrum.hpp"

namespace rws {

enum class TestName : std::uint8_t { trace, trace2, cs_star, cs_plus, hc_star, hc_plus, tw };

std::string to_string(TestName t);
/// Accepts both the CLI spellings (cs, cs+, hc, hc+, ...) and to_string names.
TestName test_from_string(const std::string& s);
bool is_max_statistic(TestName t);

struct TestOutcome {
  TestName name = TestName::trace;
  double statistic = 0.0;
  double threshold = 0.0;
  bool reject = false;
  std::optional<std::int64_t> argmax_k;  // 1-based, max-over-k statistics only
};

/// (n S_n - n p) / sqrt(2 n p), S_n the full trace.
double trace_statistic(const Spectrum& spec);
/// Rejects when the statistic reaches sqrt(2 q log n).
TestOutcome trace_test(const Spectrum& spec, double q);

/// sum_k (lambda_k - 1)^2 over the n∧p computed eigenvalues.
double trace2_raw(const Spectrum& spec);
TestOutcome trace2_test(const Spectrum& spec, const NullCalibration& cal, double z);

/// CS_{n,k} = (S_k - E0 S_k) / SD0(S_k), k = 1..n∧p.
std::vector<double> cusum_profile(const Spectrum& spec, const NullCalibration& cal);
/// HC_{n,k} = (lambda_k - E0 lambda_k) / SD0(lambda_k).
std::vector<double> hc_profile(const Spectrum& spec, const NullCalibration& cal);

/// Starred statistics leave the threshold to the caller (see
/// NullQuantileThresholds for the default policy).
TestOutcome cusum_star(const Spectrum& spec, const NullCalibration& cal, double threshold);
TestOutcome hc_star(const Spectrum& spec, const NullCalibration& cal, double threshold);

/// max_k (S_k - E0 S_k) / (k/n)^{2/3}; threshold tilde_L(n). Requires n >= 16.
TestOutcome cusum_plus(const Spectrum& spec, const NullCalibration& cal, std::int64_t n);

/// max_k (lambda_k - E0 lambda_k) / (n^{-2/3} (k ∧ (n+1-k))^{-1/3}); threshold
/// tilde_L(n). When p == n only k <= (1 - edge_fraction) n enters the max.
TestOutcome hc_plus(const Spectrum& spec, const NullCalibration& cal, std::int64_t n,
                    double edge_fraction = 0.1);

/// (lambda_1 - E0 lambda_1) / SD0(lambda_1); threshold (3 log n)^{2/3}.
TestOutcome tw_test(const Spectrum& spec, const NullCalibration& cal, std::int64_t n);

/// Index of the largest entry; the smallest index wins ties. 0-based.
std::size_t argmax_first(const std::vector<double>& v, std::size_t limit);

/// Default decision rule for the starred statistics: the empirical upper
/// `level` quantile of their null distribution, simulated with replicates
/// independent of the calibration run.
struct NullQuantileThresholds {
  double level = 0.05;
  std::int64_t reps = 0;
  std::uint64_t seed = 0;
  double cs_star = 0.0;
  double hc_star = 0.0;
  double trace2 = 0.0;  // in standardized units, comparable to trace2_test's z
};

NullQuantileThresholds null_quantile_thresholds(const NullCalibration& cal, std::int64_t reps,
                                                std::uint64_t seed, double level,
                                                const ParallelOptions& parallel = {});

/// Upper empirical quantile: the ceil((1 - level) * N)-th smallest value.
double upper_quantile(std::vector<double> values, double level);

struct DetectorSettings {
  double trace_q = 1.0;
  double trace2_z = 3.0;
  double hc_edge_fraction = 0.1;
  std::optional<NullQuantileThresholds> starred;  // required for cs_star / hc_star
};

TestOutcome run_test(TestName name, const Spectrum& spec, const NullCalibration& cal,
                     const DetectorSettings& settings);

}  // namespace rws
