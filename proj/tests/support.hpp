#pragma once

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <string>

#include "rwsdetect/calibration.hpp"

namespace rws::oracle {

// Raw density, written out independently of MPLaw.
inline double mp_density(double gamma, double x) {
  const double a = (1.0 - std::sqrt(gamma)) * (1.0 - std::sqrt(gamma));
  const double b = (1.0 + std::sqrt(gamma)) * (1.0 + std::sqrt(gamma));
  if (x <= a || x >= b) return 0.0;
  return std::sqrt((x - a) * (b - x)) / (2.0 * std::numbers::pi * x * gamma);
}

// Tanh-sinh quadrature of f * density over the support of the continuous part.
template <typename F>
double mp_expectation(double gamma, F f) {
  const double a = (1.0 - std::sqrt(gamma)) * (1.0 - std::sqrt(gamma));
  const double b = (1.0 + std::sqrt(gamma)) * (1.0 + std::sqrt(gamma));
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate([&](double x) { return f(x) * mp_density(gamma, x); }, a, b);
}

inline double mp_atom(double gamma) { return gamma > 1.0 ? 1.0 - 1.0 / gamma : 0.0; }

// Calibration at (n, p) = (300, 360) with 2000 replicates. Read from the file
// named by RWSDETECT_CAL_300_360 (written by the ctest fixture), otherwise
// computed here.
constexpr std::uint64_t kCalibrationSeed = 20240101;

inline const NullCalibration& calibration_300_360() {
  static const NullCalibration cal = [] {
    if (const char* path = std::getenv("RWSDETECT_CAL_300_360");
        path != nullptr && std::filesystem::exists(path)) {
      return load(path, 300, 360);
    }
    CalibrationOptions opts;
    opts.created_at = "fixture";
    return calibrate_null(300, 360, 2000, kCalibrationSeed, opts);
  }();
  return cal;
}

}  // namespace rws::oracle
