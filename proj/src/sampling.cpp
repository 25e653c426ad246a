#include "rwsdetect/sampling.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace rws {

namespace {

std::int64_t round_half_away(double x) { return static_cast<std::int64_t>(std::llround(x)); }

void check_open_unit(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) {
    std::ostringstream msg;
    msg << "calibration error: " << name << " = " << v << " must lie in (0, 1)";
    throw ConfigError(msg.str());
  }
}

SpikeParams finish_calibration(std::int64_t n, double gamma, double beta, double delta) {
  const std::int64_t p = round_half_away(gamma * static_cast<double>(n));
  std::int64_t r = round_half_away(std::pow(static_cast<double>(n), 1.0 - beta));
  r = std::max<std::int64_t>(r, 1);
  SpikeParams params{n, p, r, delta};
  if (!(delta < 1.0)) {
    std::ostringstream msg;
    msg << "calibration error: derived delta = " << delta << " (n = " << n << ", r = " << r
        << ") must be < 1";
    throw ConfigError(msg.str());
  }
  params.validate();
  return params;
}

void check_calibration_common(std::int64_t n, double gamma) {
  if (n < 1) throw ConfigError("calibration error: n must be >= 1");
  if (!(gamma >= 1.0) || !std::isfinite(gamma)) {
    throw ConfigError("calibration error: gamma must be finite and >= 1");
  }
}

// Householder QR of a Gaussian p x r matrix; sign-corrected thin Q.
Eigen::MatrixXd haar_from_gaussian(const Eigen::MatrixXd& g) {
  const Eigen::Index p = g.rows();
  const Eigen::Index r = g.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(p, r);
  const auto& packed = qr.matrixQR();
  for (Eigen::Index j = 0; j < r; ++j) {
    if (packed(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

// Gaussian p x r matrix filled column by column, so that the first columns
// do not depend on r.
Eigen::MatrixXd gaussian_columns(Rng& rng, std::int64_t p, std::int64_t r) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(p, r);
  for (Eigen::Index j = 0; j < r; ++j)
    for (Eigen::Index i = 0; i < p; ++i) g(i, j) = normal(rng);
  return g;
}

void write_le64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes{};
  for (int i = 0; i < 8; ++i) bytes[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes.data(), 8);
}

std::uint64_t read_le64(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), 8);
  if (!in) throw ConfigError("data file truncated");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[static_cast<std::size_t>(i)];
  return v;
}

}  // namespace

SpikeParams SpikeParams::from_excess(std::int64_t n, std::int64_t p, std::int64_t r,
                                     double excess) {
  if (!(excess > 0.0) || !std::isfinite(excess)) {
    throw ConfigError("spike excess must be positive and finite");
  }
  SpikeParams params{n, p, r, excess / (1.0 + excess)};
  params.validate();
  return params;
}

void SpikeParams::validate() const {
  std::ostringstream msg;
  if (n < 1 || p < 1) {
    msg << "invalid spike parameters: n = " << n << ", p = " << p << " must be >= 1";
  } else if (r < 0 || r > p) {
    msg << "invalid spike parameters: r = " << r << " must satisfy 0 <= r <= p = " << p;
  } else if (!(delta > 0.0 && delta < 1.0)) {
    msg << "invalid spike parameters: delta = " << delta << " must lie in (0, 1)";
  } else {
    return;
  }
  throw ConfigError(msg.str());
}

SpikeParams calibrate(const AsymptoticCalibration& cal) {
  check_calibration_common(cal.n, cal.gamma);
  check_open_unit(cal.alpha, "alpha");
  check_open_unit(cal.beta, "beta");
  const double delta = std::pow(static_cast<double>(cal.n), -cal.alpha);
  return finish_calibration(cal.n, cal.gamma, cal.beta, delta);
}

SpikeParams calibrate(const CriticalCalibration& cal) {
  check_calibration_common(cal.n, cal.gamma);
  check_open_unit(cal.beta, "beta");
  if (!(cal.theta > 0.0) || !std::isfinite(cal.theta)) {
    throw ConfigError("calibration error: theta must be positive and finite");
  }
  const std::int64_t r = std::max<std::int64_t>(
      round_half_away(std::pow(static_cast<double>(cal.n), 1.0 - cal.beta)), 1);
  const double delta = cal.theta * std::sqrt(2.0 * cal.gamma) / static_cast<double>(r);
  return finish_calibration(cal.n, cal.gamma, cal.beta, delta);
}

RowMatrix standard_normal(Rng& rng, std::int64_t rows, std::int64_t cols) {
  std::normal_distribution<double> normal;
  RowMatrix m(rows, cols);
  double* data = m.data();
  const std::int64_t total = rows * cols;
  for (std::int64_t i = 0; i < total; ++i) data[i] = normal(rng);
  return m;
}

DataMatrix sample_null(std::int64_t n, std::int64_t p, std::uint64_t seed) {
  if (n < 1 || p < 1) throw ConfigError("sample_null: n and p must be >= 1");
  Rng rng(seed);
  return DataMatrix{n, p, standard_normal(rng, n, p), seed, Hypothesis::null};
}

Eigen::MatrixXd sample_stiefel(std::int64_t p, std::int64_t r, Rng& rng) {
  if (r < 1 || r > p) {
    throw std::domain_error("sample_stiefel: requires 1 <= r <= p (r = " + std::to_string(r) +
                            ", p = " + std::to_string(p) + ")");
  }
  return haar_from_gaussian(gaussian_columns(rng, p, r));
}

Eigen::MatrixXd sample_stiefel(std::int64_t p, std::int64_t r, std::uint64_t seed) {
  Rng rng(seed);
  return sample_stiefel(p, r, rng);
}

DataMatrix sample_rws(const SpikeParams& params, std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  DataMatrix out{params.n, params.p, standard_normal(rng, params.n, params.p), seed,
                 Hypothesis::rws};
  if (params.r == 0) return out;
  const Eigen::MatrixXd q = sample_stiefel(params.p, params.r, rng);
  const double c = 1.0 / std::sqrt(1.0 - params.delta) - 1.0;
  const Eigen::MatrixXd zq = out.values * q;  // n x r
  out.values.noalias() += c * zq * q.transpose();
  return out;
}

ProxyDirections draw_proxy_directions(std::int64_t p, std::int64_t r, double delta, Rng& rng) {
  ProxyDirections dirs;
  if (r == 0) {
    dirs.raw.resize(p, 0);
    dirs.basis.resize(p, 0);
    dirs.scaled.resize(0);
    return dirs;
  }
  dirs.raw = gaussian_columns(rng, p, r);
  const Eigen::MatrixXd gram = dirs.raw.transpose() * dirs.raw;  // r x r, = p * eta
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  if (es.info() != Eigen::Success) throw NumericError("proxy direction eigensolver failed");
  const double norm_sq = es.eigenvalues().maxCoeff();  // ||Z||^2
  const double pd = static_cast<double>(p);
  if (norm_sq > pd / (4.0 * delta)) {
    dirs.truncated = true;
    dirs.basis.resize(p, 0);
    dirs.scaled.resize(0);
    return dirs;
  }
  // keep strictly positive eigenvalues; rank < r only when r > p (excluded)
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < r; ++k) {
    if (es.eigenvalues()(k) > 0.0) keep.push_back(k);
  }
  const auto rank = static_cast<Eigen::Index>(keep.size());
  dirs.basis.resize(p, rank);
  dirs.scaled.resize(rank);
  for (Eigen::Index j = 0; j < rank; ++j) {
    const Eigen::Index k = keep[static_cast<std::size_t>(j)];
    const double ev = es.eigenvalues()(k);
    dirs.basis.col(j) = dirs.raw * es.eigenvectors().col(k) / std::sqrt(ev);
    dirs.scaled(j) = delta * ev / pd;
  }
  return dirs;
}

DataMatrix sample_proxy(const SpikeParams& params, std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  DataMatrix out{params.n, params.p, standard_normal(rng, params.n, params.p), seed,
                 Hypothesis::proxy};
  const ProxyDirections dirs = draw_proxy_directions(params.p, params.r, params.delta, rng);
  if (dirs.truncated || dirs.basis.cols() == 0) return out;
  // Sigma^{1/2} = I + U diag(1/sqrt(1 - e_k) - 1) U'
  const Eigen::ArrayXd gain = (1.0 - dirs.scaled.array()).rsqrt() - 1.0;
  const Eigen::MatrixXd zu = out.values * dirs.basis;
  out.values.noalias() += zu * gain.matrix().asDiagonal() * dirs.basis.transpose();
  return out;
}

DataMatrix sample(Hypothesis h, const SpikeParams& params, std::uint64_t seed) {
  switch (h) {
    case Hypothesis::null:
      return sample_null(params.n, params.p, seed);
    case Hypothesis::rws:
      return sample_rws(params, seed);
    case Hypothesis::proxy:
      return sample_proxy(params, seed);
  }
  throw ConfigError("unknown hypothesis");
}

void save_binary(const std::filesystem::path& path, const DataMatrix& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  write_le64(out, static_cast<std::uint64_t>(data.n));
  write_le64(out, static_cast<std::uint64_t>(data.p));
  const double* v = data.values.data();
  const std::int64_t total = data.n * data.p;
  for (std::int64_t i = 0; i < total; ++i) write_le64(out, std::bit_cast<std::uint64_t>(v[i]));
  if (!out) throw ConfigError("write to '" + path.string() + "' failed");
}

DataMatrix load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open data file '" + path.string() + "'");
  const auto n = static_cast<std::int64_t>(read_le64(in));
  const auto p = static_cast<std::int64_t>(read_le64(in));
  if (n < 1 || p < 1 || n > (1LL << 31) || p > (1LL << 31)) {
    throw ConfigError("data file '" + path.string() + "' has an invalid header");
  }
  DataMatrix data{n, p, RowMatrix(n, p), 0, Hypothesis::null};
  double* v = data.values.data();
  for (std::int64_t i = 0; i < n * p; ++i) v[i] = std::bit_cast<double>(read_le64(in));
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ConfigError("data file '" + path.string() + "' has trailing bytes");
  }
  return data;
}

}  // namespace rws
