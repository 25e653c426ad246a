#include "rwsdetect/calibration.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <sstream>

#include "rwsdetect/sampling.hpp"
#include "rwsdetect/spectrum.hpp"

namespace rws {

using nlohmann::json;

void MomentAccumulator::add(std::span<const double> x) {
  if (mean_.empty() && count_ == 0) {
    mean_.assign(x.size(), 0.0);
    m2_.assign(x.size(), 0.0);
  }
  ++count_;
  const double inv = 1.0 / static_cast<double>(count_);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - mean_[k];
    mean_[k] += d * inv;
    m2_[k] += d * (x[k] - mean_[k]);
  }
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double total = na + nb;
  for (std::size_t k = 0; k < mean_.size(); ++k) {
    const double d = other.mean_[k] - mean_[k];
    mean_[k] += d * nb / total;
    m2_[k] += other.m2_[k] + d * d * na * nb / total;
  }
  count_ += other.count_;
}

std::vector<double> MomentAccumulator::sd() const {
  std::vector<double> out(m2_.size(), 0.0);
  if (count_ < 2) return out;
  const double denom = static_cast<double>(count_ - 1);
  for (std::size_t k = 0; k < m2_.size(); ++k) out[k] = std::sqrt(m2_[k] / denom);
  return out;
}

void NullCalibration::require_dims(std::int64_t n_req, std::int64_t p_req) const {
  if (n != n_req || p != p_req) {
    std::ostringstream msg;
    msg << "calibration dimension mismatch: table has (n, p) = (" << n << ", " << p
        << ") but (n, p) = (" << n_req << ", " << p_req << ") was requested";
    throw ConfigError(msg.str());
  }
}

double calibration_work(std::int64_t n, std::int64_t p, std::int64_t reps) {
  const double m = static_cast<double>(std::min(n, p));
  const double big = static_cast<double>(std::max(n, p));
  return static_cast<double>(reps) * m * m * big;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

using Sampler = std::function<DataMatrix(std::uint64_t seed)>;

NullCalibration calibrate_with(std::int64_t n, std::int64_t p, std::int64_t reps,
                               std::uint64_t master_seed, Hypothesis tag, const Sampler& draw,
                               const CalibrationOptions& opts) {
  if (n < 1 || p < 1) throw ConfigError("calibration: n and p must be >= 1");
  if (reps < 2) throw ConfigError("calibration: reps must be >= 2");
  if (opts.block_size < 1) throw ConfigError("calibration: block_size must be >= 1");
  const double work = calibration_work(n, p, reps);
  if (work > opts.work_budget) {
    std::ostringstream msg;
    msg << "calibration: estimated work " << work << " flops for (n, p, reps) = (" << n << ", "
        << p << ", " << reps << ") exceeds the budget " << opts.work_budget;
    throw ConfigError(msg.str());
  }

  const auto m = static_cast<std::size_t>(std::min(n, p));
  const std::int64_t blocks = (reps + opts.block_size - 1) / opts.block_size;

  struct Block {
    MomentAccumulator lambda, cumsum, trace2;
  };
  std::vector<Block> partial(static_cast<std::size_t>(blocks));

  parallel_for(static_cast<std::size_t>(blocks), opts.parallel, [&](std::size_t b) {
    Block acc{MomentAccumulator(m), MomentAccumulator(m), MomentAccumulator(1)};
    const std::int64_t begin = static_cast<std::int64_t>(b) * opts.block_size;
    const std::int64_t end = std::min(reps, begin + opts.block_size);
    for (std::int64_t i = begin; i < end; ++i) {
      const auto seed = derive_seed(master_seed, static_cast<std::uint64_t>(i), tag);
      const Spectrum spec = eigenvalues(draw(seed));
      double s2 = 0.0;
      for (double l : spec.lambda) s2 += (l - 1.0) * (l - 1.0);
      acc.lambda.add(spec.lambda);
      acc.cumsum.add(spec.cumsum);
      acc.trace2.add(std::span<const double>(&s2, 1));
    }
    partial[b] = std::move(acc);
  });

  Block total{MomentAccumulator(m), MomentAccumulator(m), MomentAccumulator(1)};
  for (const Block& b : partial) {
    total.lambda.merge(b.lambda);
    total.cumsum.merge(b.cumsum);
    total.trace2.merge(b.trace2);
  }

  NullCalibration cal;
  cal.n = n;
  cal.p = p;
  cal.reps = reps;
  cal.master_seed = master_seed;
  cal.means_only = opts.means_only;
  cal.mean_lambda = total.lambda.mean();
  cal.mean_S = total.cumsum.mean();
  cal.mean_trace2 = total.trace2.mean()[0];
  if (!opts.means_only) {
    cal.sd_lambda = total.lambda.sd();
    cal.sd_S = total.cumsum.sd();
    cal.sd_trace2 = total.trace2.sd()[0];
  }
  cal.created_at = opts.created_at.empty() ? utc_timestamp() : opts.created_at;
  return cal;
}

}  // namespace

NullCalibration calibrate_null(std::int64_t n, std::int64_t p, std::int64_t reps,
                               std::uint64_t master_seed, const CalibrationOptions& opts) {
  return calibrate_with(
      n, p, reps, master_seed, Hypothesis::null,
      [n, p](std::uint64_t seed) { return sample_null(n, p, seed); }, opts);
}

NullCalibration calibrate_alternative(const SpikeParams& params, std::int64_t reps,
                                      std::uint64_t master_seed, const CalibrationOptions& opts) {
  params.validate();
  return calibrate_with(
      params.n, params.p, reps, master_seed, Hypothesis::rws,
      [&params](std::uint64_t seed) { return sample_rws(params, seed); }, opts);
}

std::vector<double> mean_shift(const NullCalibration& alternative, const NullCalibration& null) {
  alternative.require_dims(null.n, null.p);
  std::vector<double> d(null.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = alternative.mean_lambda[k] - null.mean_lambda[k];
  return d;
}

namespace {

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json encode(const std::vector<double>& v) {
  json arr = json::array();
  for (double x : v) arr.push_back(format17(x));
  return arr;
}

double parse_number(const json& j, const char* field) {
  if (!j.is_string()) {
    throw ConfigError(std::string("calibration file: field '") + field +
                      "' must hold decimal strings");
  }
  const auto& s = j.get_ref<const std::string&>();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(std::string("calibration file: cannot parse '") + s + "' in field '" +
                      field + "'");
  }
  return v;
}

std::vector<double> decode(const json& doc, const char* field, std::size_t expected) {
  if (!doc.contains(field) || !doc.at(field).is_array()) {
    throw ConfigError(std::string("calibration file: missing array '") + field + "'");
  }
  const json& arr = doc.at(field);
  if (arr.size() != expected) {
    std::ostringstream msg;
    msg << "calibration file: array '" << field << "' has length " << arr.size()
        << ", expected " << expected;
    throw ConfigError(msg.str());
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const json& x : arr) out.push_back(parse_number(x, field));
  return out;
}

template <typename T>
T required(const json& doc, const char* field) {
  if (!doc.contains(field)) {
    throw ConfigError(std::string("calibration file: missing field '") + field + "'");
  }
  try {
    return doc.at(field).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("calibration file: bad field '") + field + "': " + e.what());
  }
}

}  // namespace

std::string to_json_string(const NullCalibration& cal) {
  json doc;
  doc["schema_version"] = NullCalibration::kSchemaVersion;
  doc["kind"] = "null_calibration";
  doc["n"] = cal.n;
  doc["p"] = cal.p;
  doc["reps"] = cal.reps;
  doc["master_seed"] = cal.master_seed;
  doc["means_only"] = cal.means_only;
  doc["created_at"] = cal.created_at;
  doc["mean_lambda"] = encode(cal.mean_lambda);
  doc["mean_S"] = encode(cal.mean_S);
  if (!cal.means_only) {
    doc["sd_lambda"] = encode(cal.sd_lambda);
    doc["sd_S"] = encode(cal.sd_S);
  }
  json t2 = json::object();
  if (cal.mean_trace2) t2["mean"] = format17(*cal.mean_trace2);
  if (cal.sd_trace2) t2["sd"] = format17(*cal.sd_trace2);
  doc["trace2"] = t2;
  return doc.dump(1);
}

NullCalibration from_json_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("calibration file: parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("calibration file: top level must be an object");
  const int version = required<int>(doc, "schema_version");
  if (version != NullCalibration::kSchemaVersion) {
    std::ostringstream msg;
    msg << "calibration file: schema_version " << version << " is not supported (expected "
        << NullCalibration::kSchemaVersion << ")";
    throw ConfigError(msg.str());
  }
  NullCalibration cal;
  cal.n = required<std::int64_t>(doc, "n");
  cal.p = required<std::int64_t>(doc, "p");
  cal.reps = required<std::int64_t>(doc, "reps");
  cal.master_seed = required<std::uint64_t>(doc, "master_seed");
  cal.means_only = required<bool>(doc, "means_only");
  cal.created_at = required<std::string>(doc, "created_at");
  if (cal.n < 1 || cal.p < 1) throw ConfigError("calibration file: invalid dimensions");
  const auto m = static_cast<std::size_t>(std::min(cal.n, cal.p));
  cal.mean_lambda = decode(doc, "mean_lambda", m);
  cal.mean_S = decode(doc, "mean_S", m);
  if (!cal.means_only) {
    cal.sd_lambda = decode(doc, "sd_lambda", m);
    cal.sd_S = decode(doc, "sd_S", m);
  }
  if (doc.contains("trace2")) {
    const json& t2 = doc.at("trace2");
    if (t2.contains("mean")) cal.mean_trace2 = parse_number(t2.at("mean"), "trace2.mean");
    if (t2.contains("sd")) cal.sd_trace2 = parse_number(t2.at("sd"), "trace2.sd");
  }
  return cal;
}

void save(const NullCalibration& cal, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out << to_json_string(cal) << '\n';
  if (!out) throw ConfigError("write to '" + path.string() + "' failed");
}

NullCalibration load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open calibration file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json_string(buffer.str());
}

NullCalibration load(const std::filesystem::path& path, std::int64_t n, std::int64_t p) {
  NullCalibration cal = load(path);
  cal.require_dims(n, p);
  return cal;
}

}  // namespace rws
