#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <random>

#include "rwsdetect/common.hpp"

namespace rws {

using Rng = std::mt19937_64;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Spiked alternative: Sigma = (I_p - delta Q Q')^{-1} = I_p + delta/(1-delta) Q Q'.
/// r == 0 is accepted and means "no spike".
struct SpikeParams {
  std::int64_t n = 0;
  std::int64_t p = 0;
  std::int64_t r = 0;
  double delta = 0.0;

  /// Builds params from the spike excess delta/(1-delta), i.e. the amount by
  /// which each spiked population eigenvalue exceeds 1.
  static SpikeParams from_excess(std::int64_t n, std::int64_t p, std::int64_t r,
                                 double excess);

  double spike_excess() const { return delta / (1.0 - delta); }
  double spiked_eigenvalue() const { return 1.0 / (1.0 - delta); }

  /// Throws ConfigError on violated invariants.
  void validate() const;
};

struct AsymptoticCalibration {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 1.0;
  std::int64_t n = 0;
};

struct CriticalCalibration {
  double beta = 0.0;
  double theta = 0.0;
  double gamma = 1.0;
  std::int64_t n = 0;
};

/// p = round(gamma n), r = round(n^{1-beta}), delta = n^{-alpha}.
SpikeParams calibrate(const AsymptoticCalibration& cal);

/// p = round(gamma n), r = round(n^{1-beta}), delta = theta sqrt(2 gamma) / r.
SpikeParams calibrate(const CriticalCalibration& cal);

/// Rows are samples X_i.
struct DataMatrix {
  std::int64_t n = 0;
  std::int64_t p = 0;
  RowMatrix values;
  std::uint64_t seed = 0;
  Hypothesis tag = Hypothesis::null;
};

/// Fills an rows x cols matrix with iid N(0,1) in row-major order.
RowMatrix standard_normal(Rng& rng, std::int64_t rows, std::int64_t cols);

DataMatrix sample_null(std::int64_t n, std::int64_t p, std::uint64_t seed);

/// Haar-distributed p x r matrix with orthonormal columns: thin QR of a
/// Gaussian matrix with the columns of Q sign-corrected by diag(R).
Eigen::MatrixXd sample_stiefel(std::int64_t p, std::int64_t r, Rng& rng);
Eigen::MatrixXd sample_stiefel(std::int64_t p, std::int64_t r, std::uint64_t seed);

/// X = Z + (1/sqrt(1-delta) - 1) (Z Q) Q'. The noise Z is drawn before Q, so
/// two calls that differ only in r share the same Z and nested Q.
DataMatrix sample_rws(const SpikeParams& params, std::uint64_t seed);

/// Spike directions of the Gaussian proxy model: eigen-decomposition of
/// (delta/p) Y Y' with Y = Z 1{||Z|| <= sqrt(p/delta)/2}.
struct ProxyDirections {
  Eigen::MatrixXd raw;      // Z, p x r, before truncation
  Eigen::MatrixXd basis;    // orthonormal eigenvectors for the nonzero eigenvalues
  Eigen::VectorXd scaled;   // delta * eta_k, the nonzero eigenvalues of (delta/p) Y Y'
  bool truncated = false;   // Y == 0, proxy covariance is I_p
};

ProxyDirections draw_proxy_directions(std::int64_t p, std::int64_t r, double delta,
                                      Rng& rng);

/// Samples from N(0, [I_p - (delta/p) Y Y']^{-1}) using the rank-r structure.
DataMatrix sample_proxy(const SpikeParams& params, std::uint64_t seed);

DataMatrix sample(Hypothesis h, const SpikeParams& params, std::uint64_t seed);

/// 16-byte header (n, p as little-endian int64) then row-major float64.
void save_binary(const std::filesystem::path& path, const DataMatrix& data);
DataMatrix load_binary(const std::filesystem::path& path);

}  // namespace rws
