#include "rwsdetect/mp_law.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "rwsdetect/common.hpp"

namespace rws {

namespace {

constexpr double kRelTol = 1e-10;
constexpr double kQuantileTol = 1e-9;
constexpr unsigned kMaxDepth = 30;

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw std::domain_error(std::string(what) + ": non-finite argument");
  }
}

void require_above_edge(double gamma, double t, const char* what) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw std::domain_error(std::string(what) + ": gamma must be positive and finite");
  }
  require_finite(t, what);
  const double edge = (1.0 + std::sqrt(gamma)) * (1.0 + std::sqrt(gamma));
  if (!(t > edge)) {
    throw std::domain_error(std::string(what) + ": t = " + std::to_string(t) +
                            " must exceed the upper edge " + std::to_string(edge));
  }
}

}  // namespace

MPLaw::MPLaw(double gamma) : gamma_(gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw std::domain_error("MPLaw: gamma must be positive and finite");
  }
  const double s = std::sqrt(gamma);
  edge_minus_ = (1.0 - s) * (1.0 - s);
  edge_plus_ = (1.0 + s) * (1.0 + s);
  point_mass_ = gamma > 1.0 ? 1.0 - 1.0 / gamma : 0.0;
}

MPLaw MPLaw::for_dims(std::int64_t n, std::int64_t p) {
  if (n < 1 || p < 1) throw std::domain_error("MPLaw::for_dims: n and p must be >= 1");
  return MPLaw(static_cast<double>(p) / static_cast<double>(n));
}

double MPLaw::density(double x) const {
  require_finite(x, "MPLaw::density");
  if (!(x > edge_minus_ && x < edge_plus_)) return 0.0;
  return std::sqrt((x - edge_minus_) * (edge_plus_ - x)) /
         (2.0 * std::numbers::pi * x * gamma_);
}

// x = a- + w sin^2(u), u in [0, pi/2]; removes the inverse-square-root
// behaviour of the integrand at both edges.
double MPLaw::angle_of(double x) const {
  const double w = edge_plus_ - edge_minus_;
  const double s2 = std::clamp((x - edge_minus_) / w, 0.0, 1.0);
  return std::asin(std::sqrt(s2));
}

double MPLaw::integrate_angle(double u0, double u1) const {
  if (!(u1 > u0)) return 0.0;
  const double w = edge_plus_ - edge_minus_;
  const double a = edge_minus_;
  const double g = gamma_;
  auto integrand = [w, a, g](double u) {
    const double s = std::sin(u);
    const double c = std::cos(u);
    const double s2 = s * s;
    const double x = a + w * s2;
    if (x <= 0.0) return w * c * c / (std::numbers::pi * g);  // gamma == 1 limit
    return w * w * s2 * c * c / (std::numbers::pi * g * x);
  };
  // short ranges: one 31-point rule is exact to rounding for this smooth
  // integrand, and adaptive refinement would chase roundoff near zero mass
  const unsigned depth = u1 - u0 < 1e-2 ? 0 : kMaxDepth;
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, u0, u1, depth,
                                                                       kRelTol, &err);
}

double MPLaw::integrate_density(double lo, double hi) const {
  require_finite(lo, "MPLaw::integrate_density");
  require_finite(hi, "MPLaw::integrate_density");
  if (hi <= lo) return 0.0;
  return integrate_angle(angle_of(lo), angle_of(hi));
}

double MPLaw::tail_mass(double x) const {
  require_finite(x, "MPLaw::tail_mass");
  if (x >= edge_plus_) return 0.0;
  if (x <= edge_minus_) return continuous_mass();
  const double u = angle_of(x);
  constexpr double half_pi = std::numbers::pi / 2.0;
  // integrate over the shorter angular range; the other side follows from
  // the exactly known continuous mass
  if (u > half_pi / 2.0) return integrate_angle(u, half_pi);
  return continuous_mass() - integrate_angle(0.0, u);
}

double MPLaw::cdf(double x) const {
  require_finite(x, "MPLaw::cdf");
  if (x < 0.0) return 0.0;
  if (x >= edge_plus_) return 1.0;
  if (x <= edge_minus_) return point_mass_;
  const double u = angle_of(x);
  constexpr double half_pi = std::numbers::pi / 2.0;
  if (u > half_pi / 2.0) return 1.0 - integrate_angle(u, half_pi);
  return point_mass_ + integrate_angle(0.0, u);
}

QuantileTable quantiles(const MPLaw& law, std::int64_t n, std::int64_t p) {
  if (n < 1 || p < 1) throw std::domain_error("quantiles: n and p must be >= 1");
  const double expected_gamma = static_cast<double>(p) / static_cast<double>(n);
  if (law.gamma() != expected_gamma) {
    throw std::domain_error("quantiles: law gamma does not equal p/n");
  }
  const std::int64_t m = std::min(n, p);
  QuantileTable table{n, p, std::vector<double>(static_cast<std::size_t>(m))};
  const double mass = law.continuous_mass();

  double upper = law.edge_plus();
  for (std::int64_t k = 1; k <= m; ++k) {
    const double target = static_cast<double>(k) / static_cast<double>(m) * mass;
    double q;
    if (k == m) {
      q = law.edge_minus();
    } else {
      double lo = law.edge_minus();
      double hi = upper;
      // invariant: tail_mass(lo) >= target >= tail_mass(hi)
      while (hi - lo > kQuantileTol) {
        const double mid = 0.5 * (lo + hi);
        if (law.tail_mass(mid) > target) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      q = 0.5 * (lo + hi);
    }
    table.q[static_cast<std::size_t>(k - 1)] = q;
    upper = q;
  }
  return table;
}

void write_csv(std::ostream& out, const QuantileTable& table) {
  out << "k,q_k\n";
  char buf[64];
  for (std::size_t i = 0; i < table.q.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.15g\n", i + 1, table.q[i]);
    out << buf;
  }
}

double log_integral(double gamma, double t) {
  require_above_edge(gamma, t, "log_integral");
  const double a = t - gamma - 1.0;
  const double root = 2.0 * std::sqrt(gamma);
  const double b = std::sqrt((a - root) * (a + root));
  // A - B via the conjugate; avoids cancellation for large t
  const double a_minus_b = 4.0 * gamma / (a + b);
  const double inner = (a + b) + gamma * a_minus_b + 4.0 * gamma;  // (g+1)A - (g-1)B + 4g
  const double g2 = 2.0 * gamma;
  return (gamma - 1.0) / g2 * std::log(inner) + a_minus_b / g2 -
         (gamma + 1.0) / g2 * std::log(a_minus_b) + std::numbers::ln2 / gamma +
         (gamma + 1.0) / g2 * std::log(gamma);
}

double hilbert_transform(double gamma, double t) {
  require_above_edge(gamma, t, "hilbert_transform");
  const double a = t - gamma - 1.0;
  const double root = 2.0 * std::sqrt(gamma);
  const double b = std::sqrt((a - root) * (a + root));
  // (t + gamma - 1 - B) / (2 gamma t) = (2 gamma + (A - B)) / (2 gamma t)
  return (1.0 + 2.0 / (a + b)) / t;
}

}  // namespace rws
