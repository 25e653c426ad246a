#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rwsdetect/mp_law.hpp"
#include "rwsdetect/spectrum.hpp"

using namespace rws;

TEST(Eigenvalues, ScaledIdentity) {
  const int n = 6;
  RowMatrix x = RowMatrix::Identity(n, n) * std::sqrt(static_cast<double>(n));
  const Spectrum s = eigenvalues(x);
  ASSERT_EQ(s.size(), 6u);
  for (double l : s.lambda) EXPECT_NEAR(l, 1.0, 1e-12);
}

TEST(Eigenvalues, RankOne) {
  RowMatrix x(1, 3);
  x << 1.0, 2.0, -3.0;
  const Spectrum s = eigenvalues(x);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_NEAR(s.lambda[0], 14.0, 1e-12);
  EXPECT_EQ(s.with_zeros().size(), 3u);
}

TEST(Eigenvalues, DualGram) {
  Rng rng(4);
  const RowMatrix x = standard_normal(rng, 5, 8);
  const Spectrum s = eigenvalues(x);
  const Eigen::MatrixXd big = x.transpose() * x / 5.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(big, Eigen::EigenvaluesOnly);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + 8);
  std::sort(ev.rbegin(), ev.rend());
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(s.lambda[k], ev[k], 1e-10);
  for (int k = 5; k < 8; ++k) EXPECT_NEAR(ev[k], 0.0, 1e-10);
}

TEST(Eigenvalues, TallMatrixUsesSmallerGram) {
  Rng rng(6);
  const RowMatrix x = standard_normal(rng, 9, 4);
  const Spectrum s = eigenvalues(x);
  ASSERT_EQ(s.size(), 4u);
  const Eigen::MatrixXd small = x.transpose() * x / 9.0;
  EXPECT_NEAR(s.trace(), small.trace(), 1e-12);
}

TEST(Eigenvalues, InvariantsOnNullData) {
  const DataMatrix d = sample_null(120, 150, 8);
  const Spectrum s = eigenvalues(d);
  ASSERT_EQ(s.size(), 120u);
  for (std::size_t k = 1; k < s.size(); ++k) {
    EXPECT_GE(s.lambda[k - 1], s.lambda[k]);
    EXPECT_NEAR(s.cumsum[k] - s.cumsum[k - 1], s.lambda[k], 1e-12);
  }
  EXPECT_GE(s.lambda.back(), 0.0);
  const double frob = d.values.squaredNorm() / 120.0;
  EXPECT_NEAR(s.trace(), frob, 1e-10 * frob);
}

TEST(Eigenvalues, NonFiniteInput) {
  RowMatrix x = RowMatrix::Ones(3, 3);
  x(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(eigenvalues(x), NumericError);
  EXPECT_THROW(Spectrum::from_values(3, 3, {1.0, std::numeric_limits<double>::infinity()}),
               NumericError);
}

TEST(Spectrum, FromValuesSortsAndClamps) {
  const Spectrum s = Spectrum::from_values(3, 4, {1.0, -1e-17, 3.0});
  EXPECT_EQ(s.lambda, (std::vector<double>{3.0, 1.0, 0.0}));
  EXPECT_EQ(s.cumsum, (std::vector<double>{3.0, 4.0, 4.0}));
}

TEST(EmpiricalCdf, Counts) {
  const Spectrum s = Spectrum::from_values(2, 4, {3.0, 1.0});
  EXPECT_EQ(empirical_cdf(s, 4, -0.5), 0.0);
  EXPECT_EQ(empirical_cdf(s, 4, 0.0), 0.5);
  EXPECT_EQ(empirical_cdf(s, 4, 2.0), 0.75);
  EXPECT_EQ(empirical_cdf(s, 4, 3.0), 1.0);
  EXPECT_EQ(empirical_cdf(s, 4, 10.0), 1.0);
}

TEST(KsDistance, NullData) {
  const Spectrum s = eigenvalues(sample_null(500, 600, 12));
  EXPECT_LE(ks_distance_to_mp(s, MPLaw::for_dims(500, 600)), 0.05);
}

TEST(KsDistance, QuantilePlugIn) {
  const int n = 200, p = 240;
  const MPLaw law = MPLaw::for_dims(n, p);
  const auto table = quantiles(law, n, p);
  const Spectrum s = Spectrum::from_values(n, p, table.q);
  EXPECT_LE(ks_distance_to_mp(s, law), 1.0 / n + 1e-8);
}

TEST(KsDistance, BruteForceAgreement) {
  const int n = 40, p = 50;
  const Spectrum s = eigenvalues(sample_null(n, p, 3));
  const MPLaw law = MPLaw::for_dims(n, p);
  double sup = std::abs(empirical_cdf(s, p, 0.0) - law.cdf(0.0));
  for (double l : s.lambda) {
    const double below = std::nextafter(l, 0.0);
    sup = std::max(sup, std::abs(empirical_cdf(s, p, l) - law.cdf(l)));
    sup = std::max(sup, std::abs(empirical_cdf(s, p, below) - law.cdf(below)));
  }
  EXPECT_NEAR(ks_distance_to_mp(s, law), sup, 1e-9);
}

TEST(KsDistance, SingleSample) {
  const Spectrum s = eigenvalues(sample_null(1, 3, 1));
  const double d = ks_distance_to_mp(s, MPLaw::for_dims(1, 3));
  EXPECT_GE(d, 0.0);
  EXPECT_LE(d, 1.0);
}

TEST(Rigidity, NullEigenvaluesNearQuantiles) {
  const int n = 300, p = 360, reps = 200;
  const auto q = quantiles(MPLaw::for_dims(n, p), n, p).q;
  const double bound = 10.0 * std::log(n) * std::log(n);
  int within_lambda = 0, within_cumsum = 0;
  for (int i = 0; i < reps; ++i) {
    const Spectrum s = eigenvalues(sample_null(n, p, derive_seed(99, i, Hypothesis::null)));
    double dev = 0.0, cdev = 0.0, qsum = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double kt = std::min<double>(k, n + 1 - k);
      dev = std::max(dev, std::abs(s.lambda[k - 1] - q[k - 1]) * std::pow(n, 2.0 / 3.0) *
                              std::cbrt(kt));
      qsum += q[k - 1];
      cdev = std::max(cdev, std::abs(s.cumsum[k - 1] - qsum) / std::pow(double(k) / n, 2.0 / 3.0));
    }
    within_lambda += dev <= bound;
    within_cumsum += cdev <= bound;
  }
  EXPECT_GE(within_lambda, 198);
  EXPECT_GE(within_cumsum, 198);
}

TEST(Spectrum, CsvFormat) {
  const Spectrum s = Spectrum::from_values(2, 2, {2.0, 1.0});
  std::ostringstream out;
  write_csv(out, s);
  EXPECT_EQ(out.str(), "k,lambda_k,S_k\n1,2,2\n2,1,3\n");
}
