#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rwsdetect/calibration.hpp"
#include "rwsdetect/common.hpp"
#include "rwsdetect/detectors.hpp"
#include "rwsdetect/sampling.hpp"

namespace rws {

/// Best threshold for "reject when statistic > threshold" on a labelled
/// sample. error = FP / #null + FN / #alt, minimized exactly over all real
/// thresholds; ties in the error go to the smallest threshold.
struct ThresholdScan {
  double error = 0.0;
  double threshold = 0.0;  // midpoint between consecutive distinct values, or ±inf
  std::int64_t false_positives = 0;
  std::int64_t false_negatives = 0;
};

ThresholdScan ideal_error_from_values(const std::vector<double>& null_values,
                                      const std::vector<double>& alt_values);

/// Value of the ideal-error criterion at a fixed threshold.
double error_at_threshold(const std::vector<double>& null_values,
                          const std::vector<double>& alt_values, double threshold);

struct IdealErrorConfig {
  std::int64_t n = 0;
  std::int64_t p = 0;
  std::int64_t r = 0;
  double delta_excess = 0.0;
  std::int64_t reps_per_side = 100;
  std::int64_t repetitions = 20;

  SpikeParams params() const { return SpikeParams::from_excess(n, p, r, delta_excess); }
};

struct TestErrorSummary {
  TestName test = TestName::trace;
  double mean_error = 0.0;
  double sd_error = 0.0;
  std::vector<double> errors;  // one per repetition
  // hc_star / cs_star only: the fixed-k statistic with the smallest ideal error
  std::optional<double> mean_argmax;
  std::optional<double> sd_argmax;
  std::optional<double> mean_error_at_argmax;
};

struct IdealErrorReport {
  IdealErrorConfig config;
  std::uint64_t master_seed = 0;
  std::vector<TestErrorSummary> tests;
  /// Mean over all alternative datasets of lambda_k minus the calibration mean.
  std::vector<double> mean_shift;

  const TestErrorSummary& get(TestName t) const;
};

/// Repetition j, dataset i: derive_seed(master_seed, j, i, null | rws).
IdealErrorReport ideal_error(const IdealErrorConfig& config, const std::vector<TestName>& tests,
                             std::uint64_t master_seed, const NullCalibration& cal,
                             const ParallelOptions& parallel = {});

struct PhaseSweepConfig {
  std::vector<double> alpha_grid;
  std::vector<double> beta_grid;
  double gamma = 1.0;
  std::int64_t n = 0;
  std::int64_t reps = 200;
  std::vector<TestName> tests;
  double trace_q = 1.0;
  double level = 0.05;             // starred null-quantile policy
  std::int64_t threshold_reps = 0;  // null replicates for that policy; 0: same as reps
};

struct PointRisk {
  TestName test = TestName::trace;
  double type1 = 0.0;
  double type2 = 0.0;
  double risk = 0.0;  // type1 + type2, in [0, 2]
  double threshold = 0.0;
};

struct PhasePoint {
  double alpha = 0.0;
  double beta = 0.0;
  bool skipped = false;
  std::string note;
  SpikeParams params;
  std::vector<PointRisk> risks;

  const PointRisk& get(TestName t) const;
};

struct PhaseSweepReport {
  PhaseSweepConfig config;
  std::uint64_t master_seed = 0;
  std::int64_t p = 0;
  std::vector<PhasePoint> points;
};

/// Null replicates are shared across the grid (stream 0); grid point g uses
/// stream g + 1. `cal` is required unless only the trace test is requested.
PhaseSweepReport phase_sweep(const PhaseSweepConfig& config, std::uint64_t master_seed,
                             const NullCalibration* cal, const ParallelOptions& parallel = {});

/// alpha = 1 - beta.
double boundary_detectable(double beta);
/// alpha = max(1 - 5 beta / 4, (1 - beta) / 2).
double boundary_tw(double beta);

struct QuantileSummary {
  double median = 0.0;
  double q90 = 0.0;
  double q99 = 0.0;
  double max = 0.0;
};

QuantileSummary summarize(std::vector<double> values);

struct RigidityConfig {
  std::int64_t n = 0;
  std::int64_t p = 0;
  std::int64_t reps = 200;
  Hypothesis hypothesis = Hypothesis::null;
  std::optional<SpikeParams> params;  // required for Hypothesis::rws
};

struct RigidityReport {
  RigidityConfig config;
  std::uint64_t master_seed = 0;
  double tilde_L = 0.0;
  double quantile_bound = 0.0;  // 10 log^2 n
  /// max_k |S_k - E0 S_k| / (k/n)^{2/3} per replicate.
  std::vector<double> cs_deviation;
  /// max_k |lambda_k - E0 lambda_k| / (n^{-2/3} (k ∧ (n+1-k))^{-1/3}).
  std::vector<double> hc_deviation;
  /// max_k |lambda_k - q_k| with the same scaling, q_k the MP quantiles.
  std::vector<double> quantile_deviation;
  /// |lambda_1 - E0 lambda_1| / n^{-2/3}.
  std::vector<double> k1_deviation;
  QuantileSummary cs_summary, hc_summary, quantile_summary, k1_summary;
  double cs_exceed_fraction = 0.0;
  double hc_exceed_fraction = 0.0;
  double quantile_exceed_fraction = 0.0;
};

/// Replicate i: derive_seed(master_seed, i, hypothesis).
RigidityReport rigidity_audit(const RigidityConfig& config, std::uint64_t master_seed,
                              const NullCalibration& cal, const ParallelOptions& parallel = {});

/// Reports as JSON documents (no timestamps) and CSV tables.
std::string to_json_string(const IdealErrorReport& report);
std::string to_json_string(const PhaseSweepReport& report);
std::string to_json_string(const RigidityReport& report);
void write_csv(std::ostream& out, const IdealErrorReport& report);
void write_csv(std::ostream& out, const PhaseSweepReport& report);
void write_csv(std::ostream& out, const RigidityReport& report);

/// `<stem>.dat` (alpha beta risk per test), `<stem>_boundary.dat` and a
/// gnuplot script `<stem>.gp` that draws one risk map per test.
void write_gnuplot(const std::filesystem::path& stem, const PhaseSweepReport& report);

}  // namespace rws
