#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rwsdetect/mp_law.hpp"
#include "rwsdetect/sampling.hpp"

namespace rws {

/// Descending nonzero-spectrum of the sample covariance (1/n) X'X together
/// with the partial sums S_k = lambda_1 + ... + lambda_k. Only the n∧p
/// computed values are stored; the p - n structural zeros (p > n) are implied.
struct Spectrum {
  std::int64_t n = 0;
  std::int64_t p = 0;
  std::vector<double> lambda;
  std::vector<double> cumsum;

  /// Sorts descending (stable), clamps round-off negatives to zero and
  /// computes the partial sums.
  static Spectrum from_values(std::int64_t n, std::int64_t p, std::vector<double> values);

  std::size_t size() const noexcept { return lambda.size(); }
  double trace() const noexcept { return cumsum.empty() ? 0.0 : cumsum.back(); }

  /// All p eigenvalues of (1/n) X'X, descending, structural zeros included.
  std::vector<double> with_zeros() const;
};

/// Eigenvalues of (1/n) X'X through the smaller of the two Gram matrices.
Spectrum eigenvalues(const DataMatrix& data);
Spectrum eigenvalues(const RowMatrix& x);

/// Fraction of all p eigenvalues (structural zeros included) that are <= x.
double empirical_cdf(const Spectrum& spec, std::int64_t p, double x);

/// Kolmogorov-Smirnov distance between the empirical spectral distribution
/// and the MP law, evaluated at and just below every jump point.
double ks_distance_to_mp(const Spectrum& spec, const MPLaw& law);

/// Header `k,lambda_k,S_k`.
void write_csv(std::ostream& out, const Spectrum& spec);

}  // namespace rws
