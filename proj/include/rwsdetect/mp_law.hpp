#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace rws {

/// Marchenko-Pastur law with aspect ratio gamma = p/n: a point mass of
/// max(1 - 1/gamma, 0) at zero plus the density
///   (1 / (2 pi x gamma)) sqrt((x - a-)(a+ - x)) on (a-, a+),  a± = (1 ± sqrt(gamma))^2.
///
/// All member functions are const and thread-safe.
class MPLaw {
 public:
  explicit MPLaw(double gamma);

  /// Law with gamma = p/n computed as an exact ratio of the two integers.
  static MPLaw for_dims(std::int64_t n, std::int64_t p);

  double gamma() const noexcept { return gamma_; }
  double edge_minus() const noexcept { return edge_minus_; }
  double edge_plus() const noexcept { return edge_plus_; }
  double point_mass_at_zero() const noexcept { return point_mass_; }
  double continuous_mass() const noexcept { return 1.0 - point_mass_; }

  /// Continuous density; the atom at zero is not included.
  double density(double x) const;

  /// Distribution function including the atom at zero.
  double cdf(double x) const;

  /// Continuous mass in (x, a+].
  double tail_mass(double x) const;

  /// Quadrature of the density over [lo, hi] ∩ [a-, a+].
  double integrate_density(double lo, double hi) const;

 private:
  double angle_of(double x) const;
  double integrate_angle(double u0, double u1) const;

  double gamma_;
  double edge_minus_;
  double edge_plus_;
  double point_mass_;
};

/// Classical eigenvalue locations: q[k-1] is the point above which the
/// continuous part of the law, normalized to unit mass, has mass k/(n∧p).
struct QuantileTable {
  std::int64_t n = 0;
  std::int64_t p = 0;
  std::vector<double> q;  // descending, length n∧p
};

/// Bisection on the tail mass to absolute tolerance 1e-9 in x.
QuantileTable quantiles(const MPLaw& law, std::int64_t n, std::int64_t p);

/// Header `k,q_k`, one row per k, 15 significant digits.
void write_csv(std::ostream& out, const QuantileTable& table);

/// Closed form of  ∫ log(t - x) mu_gamma(dx)  for t > (1 + sqrt(gamma))^2,
/// the atom at zero included.
double log_integral(double gamma, double t);

/// H(t; gamma) = ∫ (t - x)^{-1} mu_gamma(dx) for t > (1 + sqrt(gamma))^2.
double hilbert_transform(double gamma, double t);

}  // namespace rws
