#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rwsdetect/common.hpp"
#include "rwsdetect/sampling.hpp"

namespace rws {

/// Running mean / second central moment per coordinate (Welford), with the
/// pairwise merge of Chan et al. Merging in a fixed order is deterministic.
class MomentAccumulator {
 public:
  MomentAccumulator() = default;
  explicit MomentAccumulator(std::size_t dim) : mean_(dim, 0.0), m2_(dim, 0.0) {}

  void add(std::span<const double> x);
  void merge(const MomentAccumulator& other);

  std::int64_t count() const noexcept { return count_; }
  const std::vector<double>& mean() const noexcept { return mean_; }
  /// Sample standard deviation, denominator count - 1.
  std::vector<double> sd() const;

 private:
  std::int64_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

/// Monte Carlo null moments of lambda_k and S_k (k = 1..n∧p) and of the
/// scalar S^(2) = sum_k (lambda_k - 1)^2.
struct NullCalibration {
  static constexpr int kSchemaVersion = 1;

  std::int64_t n = 0;
  std::int64_t p = 0;
  std::int64_t reps = 0;
  std::uint64_t master_seed = 0;
  bool means_only = false;  // sd_* and trace2 sd left empty / unset
  std::vector<double> mean_lambda;
  std::vector<double> sd_lambda;
  std::vector<double> mean_S;
  std::vector<double> sd_S;
  std::optional<double> mean_trace2;
  std::optional<double> sd_trace2;
  std::string created_at;

  std::size_t size() const noexcept { return mean_lambda.size(); }
  bool has_sd() const noexcept { return !means_only && sd_lambda.size() == size(); }

  /// Throws ConfigError naming both the table's and the requested dimensions.
  void require_dims(std::int64_t n_req, std::int64_t p_req) const;

  bool operator==(const NullCalibration&) const = default;
};

struct CalibrationOptions {
  ParallelOptions parallel;
  bool means_only = false;
  /// Upper bound on reps * m^2 * max(n, p) (floating point operations of the
  /// Gram products); larger requests are refused.
  double work_budget = 1e14;
  /// Replicates per accumulation block; fixes the merge tree.
  std::int64_t block_size = 32;
  /// Timestamp recorded in the table; the current UTC time when empty.
  std::string created_at;
};

double calibration_work(std::int64_t n, std::int64_t p, std::int64_t reps);

/// Replicate i uses seed derive_seed(master_seed, i, Hypothesis::null).
NullCalibration calibrate_null(std::int64_t n, std::int64_t p, std::int64_t reps,
                               std::uint64_t master_seed, const CalibrationOptions& opts = {});

/// Same moments under the RWS alternative; replicate i uses
/// derive_seed(master_seed, i, Hypothesis::rws). Stored in the same table type.
NullCalibration calibrate_alternative(const SpikeParams& params, std::int64_t reps,
                                      std::uint64_t master_seed,
                                      const CalibrationOptions& opts = {});

/// E1[lambda_k] - E0[lambda_k], k = 1..n∧p.
std::vector<double> mean_shift(const NullCalibration& alternative, const NullCalibration& null);

/// Single JSON document; numeric arrays as 17-significant-digit strings.
void save(const NullCalibration& cal, const std::filesystem::path& path);
NullCalibration load(const std::filesystem::path& path);
NullCalibration load(const std::filesystem::path& path, std::int64_t n, std::int64_t p);

std::string to_json_string(const NullCalibration& cal);
NullCalibration from_json_string(const std::string& text);

std::string utc_timestamp();

}  // namespace rws
