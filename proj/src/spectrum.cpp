#include "rwsdetect/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>

namespace rws {

Spectrum Spectrum::from_values(std::int64_t n, std::int64_t p, std::vector<double> values) {
  for (double& v : values) {
    if (!std::isfinite(v)) throw NumericError("spectrum contains a non-finite eigenvalue");
    v = std::max(v, 0.0);
  }
  std::stable_sort(values.begin(), values.end(), std::greater<>());
  Spectrum s{n, p, std::move(values), {}};
  s.cumsum.resize(s.lambda.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < s.lambda.size(); ++k) {
    acc += s.lambda[k];
    s.cumsum[k] = acc;
  }
  return s;
}

std::vector<double> Spectrum::with_zeros() const {
  std::vector<double> all(lambda);
  all.resize(static_cast<std::size_t>(std::max<std::int64_t>(p, std::ssize(lambda))), 0.0);
  return all;
}

Spectrum eigenvalues(const RowMatrix& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n < 1 || p < 1) throw ConfigError("eigenvalues: empty data matrix");
  if (!x.allFinite()) throw NumericError("eigenvalues: data matrix has non-finite entries");

  const double scale = 1.0 / static_cast<double>(n);
  const Eigen::Index m = std::min(n, p);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  if (p >= n) {
    gram.selfadjointView<Eigen::Lower>().rankUpdate(x, scale);  // (1/n) X X'
  } else {
    gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), scale);  // (1/n) X'X
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("eigenvalues: eigensolver did not converge");
  const Eigen::VectorXd& ev = es.eigenvalues();
  return Spectrum::from_values(n, p, std::vector<double>(ev.data(), ev.data() + ev.size()));
}

Spectrum eigenvalues(const DataMatrix& data) { return eigenvalues(data.values); }

double empirical_cdf(const Spectrum& spec, std::int64_t p, double x) {
  if (x < 0.0) return 0.0;
  const auto m = std::ssize(spec.lambda);
  const std::int64_t zeros = std::max<std::int64_t>(p - m, 0);
  // lambda is descending: count entries <= x from the back
  const auto first_le = std::lower_bound(spec.lambda.begin(), spec.lambda.end(), x,
                                         [](double a, double b) { return a > b; });
  const auto count_le = static_cast<std::int64_t>(spec.lambda.end() - first_le);
  return static_cast<double>(zeros + count_le) / static_cast<double>(p);
}

double ks_distance_to_mp(const Spectrum& spec, const MPLaw& law) {
  const std::int64_t p = spec.p;
  const auto m = std::ssize(spec.lambda);
  const std::int64_t zeros = std::max<std::int64_t>(p - m, 0);
  const double pd = static_cast<double>(p);

  std::vector<double> asc(spec.lambda.rbegin(), spec.lambda.rend());
  // at zero: both distribution functions jump to their atom
  double below = 0.0;
  std::size_t i = 0;
  while (i < asc.size() && asc[i] <= 0.0) ++i;
  double sup = std::abs(static_cast<double>(zeros + static_cast<std::int64_t>(i)) / pd -
                        law.cdf(0.0));
  below = static_cast<double>(zeros + static_cast<std::int64_t>(i));
  while (i < asc.size()) {
    const double x = asc[i];
    std::size_t j = i;
    while (j < asc.size() && asc[j] == x) ++j;
    const double f = law.cdf(x);
    const double left = below / pd;
    const double at = (below + static_cast<double>(j - i)) / pd;
    sup = std::max({sup, std::abs(left - f), std::abs(at - f)});
    below += static_cast<double>(j - i);
    i = j;
  }
  return sup;
}

void write_csv(std::ostream& out, const Spectrum& spec) {
  out << "k,lambda_k,S_k\n";
  char buf[96];
  for (std::size_t k = 0; k < spec.lambda.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", k + 1, spec.lambda[k], spec.cumsum[k]);
    out << buf;
  }
}

}  // namespace rws
