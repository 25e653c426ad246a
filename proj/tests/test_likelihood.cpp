#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rwsdetect/likelihood.hpp"
#include "support.hpp"

using namespace rws;

TEST(ProxyLR, GuardCase) {
  const SpikeParams params{6, 8, 2, 0.1};
  const double top = 1.0 / 0.9 + 8.0 / (0.1 * 6.0) + 0.1;
  const Spectrum s = Spectrum::from_values(6, 8, {top, 1.0, 0.8, 0.5, 0.3, 0.1});
  const auto e = proxy_lr_eigform(s, params);
  EXPECT_TRUE(e.guard_triggered);
  EXPECT_EQ(e.log_value, 0.0);
  const auto m = proxy_lr_measform(s, params, MPLaw::for_dims(6, 8));
  EXPECT_TRUE(m.guard_triggered);
  EXPECT_EQ(m.log_value, 0.0);
}

TEST(ProxyLR, NoSpikes) {
  const Spectrum s = eigenvalues(sample_null(6, 8, 1));
  const SpikeParams params{6, 8, 0, 0.1};
  EXPECT_EQ(proxy_lr_eigform(s, params).log_value, 0.0);
  EXPECT_EQ(proxy_lr_measform(s, params, MPLaw::for_dims(6, 8)).log_value, 0.0);
}

TEST(ProxyLR, SmallInstanceDualForms) {
  const SpikeParams params{6, 8, 2, 0.1};
  const Spectrum s = Spectrum::from_values(6, 8, {2.9, 1.7, 1.2, 0.8, 0.4, 0.05});
  const auto e = proxy_lr_eigform(s, params);
  const auto m = proxy_lr_measform(s, params, MPLaw::for_dims(6, 8));
  ASSERT_FALSE(e.guard_triggered);
  EXPECT_NEAR(e.log_value, m.log_value, 1e-10);
}

TEST(ProxyLR, DirectProductForm) {
  // plain evaluation of the product form with all p eigenvalues listed
  const SpikeParams params{6, 8, 2, 0.1};
  const std::vector<double> lam{2.9, 1.7, 1.2, 0.8, 0.4, 0.05, 0.0, 0.0};
  const double n = 6, p = 8, r = 2, d = 0.1;
  double sum = 0.0;
  for (double l : lam) sum += std::log(1.0 - (d * n / p) * (l - 1.0 / (1.0 - d)));
  const double b = n * r * d / (2 * (1 - d)) - n * r * r * d * d / (4 * p * (1 - d) * (1 - d));
  const double expected = (n * r / 2) * std::log(1 - d) + b - (r / 2) * sum;
  const Spectrum s = Spectrum::from_values(6, 8, {lam.begin(), lam.begin() + 6});
  EXPECT_NEAR(proxy_lr_eigform(s, params).log_value, expected, 1e-12);
}

TEST(ProxyLR, RandomInstancesDualForms) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> dim(3, 30);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; checked < 100; ++trial) {
    ASSERT_LT(trial, 1000);
    const int n = dim(rng);
    const int p = dim(rng);
    const double g = static_cast<double>(p) / n;
    const double excess = 0.9 * std::sqrt(g) * unit(rng) + 1e-3;
    const int r = std::min(p, 1 + static_cast<int>(unit(rng) * 5));
    const SpikeParams params = SpikeParams::from_excess(n, p, r, excess);
    const Spectrum s = eigenvalues(sample_null(n, p, derive_seed(55, trial, Hypothesis::null)));
    const auto e = proxy_lr_eigform(s, params);
    if (e.guard_triggered) continue;
    const auto m = proxy_lr_measform(s, params, MPLaw::for_dims(n, p));
    EXPECT_FALSE(m.guard_triggered);
    EXPECT_NEAR(e.log_value, m.log_value, 1e-10 * std::max(1.0, std::abs(e.log_value)))
        << "n=" << n << " p=" << p << " r=" << r << " excess=" << excess;
    ++checked;
  }
}

class PsiIdentity : public ::testing::TestWithParam<std::tuple<int, double>> {};

TEST_P(PsiIdentity, QuadratureMatchesClosedForm) {
  const auto [p, delta] = GetParam();
  const SpikeParams params{100, p, 1, delta};
  const double gamma = p / 100.0;
  const double closed = std::log1p(-delta) / delta + 1.0 / (1.0 - delta);
  const double quad = oracle::mp_expectation(gamma, [&](double x) { return psi(x, params); }) +
                      oracle::mp_atom(gamma) * psi(0.0, params);
  EXPECT_NEAR(quad, closed, 1e-6);
  EXPECT_NEAR(psi_integral(params), closed, 1e-6);
}

INSTANTIATE_TEST_SUITE_P(Grid, PsiIdentity,
                         ::testing::Combine(::testing::Values(120, 200),
                                            ::testing::Values(0.05, 0.1)));

TEST(ProxyLR, VanishingDelta) {
  const Spectrum s = eigenvalues(sample_null(50, 60, 3));
  const SpikeParams params{50, 60, 3, 1e-8};
  EXPECT_LE(std::abs(proxy_lr_eigform(s, params).log_value), 1e-4);
  EXPECT_LE(std::abs(proxy_lr_measform(s, params, MPLaw::for_dims(50, 60)).log_value), 1e-4);
}

TEST(ProxyLR, MeasformDomain) {
  const Spectrum s = eigenvalues(sample_null(50, 60, 3));
  const SpikeParams params = SpikeParams::from_excess(50, 60, 1, 1.2);  // sqrt(1.2) ~ 1.095
  EXPECT_THROW(psi_integral(params), std::domain_error);
  EXPECT_THROW(proxy_lr_measform(s, params, MPLaw::for_dims(50, 60)), std::domain_error);
  EXPECT_THROW(proxy_lr_measform(s, SpikeParams{50, 60, 1, 0.1}, MPLaw::for_dims(50, 50)),
               ConfigError);
}

TEST(Critical, VanishingSignal) {
  const auto sum = critical_loglr_experiment(CriticalCalibration{0.5, 0.01, 1.2, 400}, 200, 3);
  EXPECT_NEAR(sum.mean_null, 0.0, 0.02);
  EXPECT_NEAR(sum.mean_alt, 0.0, 0.02);
  EXPECT_EQ(sum.guard_null, 0);
}

TEST(Critical, ProxyTracksTraceStatistic) {
  const auto sum = critical_loglr_experiment(CriticalCalibration{0.5, 1.0, 1.2, 100}, 100, 4);
  EXPECT_EQ(sum.reps, 100);
  EXPECT_GT(sum.corr_null, 0.9);
  EXPECT_NEAR(sum.theta_n, sum.params.r * sum.params.delta / std::sqrt(2.0 * 1.2), 1e-12);
}

TEST(NullRatio, MeanNearOne) {
  const double n = 400.0;
  const SpikeParams params{400, 480, std::llround(std::pow(n, 0.4)), std::pow(n, -0.7)};
  const auto res = null_mean_of_proxy_lr(params, 1000, 6);
  EXPECT_FALSE(res.overflow);
  EXPECT_NEAR(res.mean, 1.0, 0.1);
  EXPECT_LE(res.guard_count, 1);  // frequency <= 0.001
}
