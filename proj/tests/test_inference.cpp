#include "predrobust/inference.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace predrobust;

namespace {

RegressionSample<double> heteroskedastic_sample(std::uint64_t seed, Eigen::Index T) {
  Rng rng(seed);
  std::normal_distribution<double> n;
  Series<double> x(T), y(T);
  double level = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    x[t] = level;
    const double vol = t < T / 2 ? 1.0 : 3.0;
    y[t] = vol * n(rng);
    level += n(rng);
  }
  return {y, x};
}

double brute_tau(const RegressionSample<double>& s, const KernelSpec& k, double h) {
  const Eigen::Index T = s.size();
  double sxy = 0.0, sxx = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    sxy += s.x_lag()[t] * s.y()[t];
    sxx += s.x_lag()[t] * s.x_lag()[t];
  }
  const double b = sxy / sxx;
  std::vector<double> u2(static_cast<std::size_t>(T));
  for (Eigen::Index t = 0; t < T; ++t) u2[t] = std::pow(s.y()[t] - b * s.x_lag()[t], 2);
  double sum = 0.0;
  for (Eigen::Index t = 1; t <= T; ++t) {
    double r = static_cast<double>(t - 1) / T;
    if (r < h) r = h;
    double num = 0.0, den = 0.0;
    for (Eigen::Index j = 1; j <= T; ++j) {
      const double w = kernel_value(k, (r - static_cast<double>(j) / T) / h);
      num += w * u2[j - 1];
      den += w;
    }
    sum += (s.x_lag()[t - 1] >= 0 ? 1.0 : -1.0) * s.y()[t - 1] / std::sqrt(num / den);
  }
  return sum / std::sqrt(static_cast<double>(T));
}

}  // namespace

TEST_CASE("normal distribution reference values") {
  CHECK(NormalDist::cdf(0.0) == 0.5);
  CHECK(NormalDist::cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-14));
  CHECK(NormalDist::cdf(-1.0) == doctest::Approx(0.15865525393145707).epsilon(1e-14));
  CHECK(NormalDist::survival(10.0) == doctest::Approx(7.619853024160527e-24).epsilon(1e-12));
  CHECK(NormalDist::pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-15));
  CHECK(NormalDist::quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-13));
  CHECK(NormalDist::quantile(0.95) == doctest::Approx(1.6448536269514722).epsilon(1e-13));
  CHECK(NormalDist::quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-12));
  CHECK(NormalDist::quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::isinf(NormalDist::quantile(0.0)));
  CHECK(std::isinf(NormalDist::quantile(1.0)));
  CHECK(std::isnan(NormalDist::quantile(1.5)));
}

TEST_CASE("quantile inverts the cdf across the range") {
  for (double p = 1e-6; p < 1.0; p += 0.0371) {
    CHECK(NormalDist::cdf(NormalDist::quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  }
  for (double x = -8.0; x <= 8.0; x += 0.25) {
    // Above x = 4 the upper tail 1 - p keeps too few digits for a 1e-9 round trip.
    const double p = NormalDist::cdf(x);
    if (p > 0.0 && x <= 4.0) CHECK(NormalDist::quantile(p) == doctest::Approx(x).epsilon(1e-9));
  }
}

TEST_CASE("critical values and rejection") {
  CHECK(normal_critical_value(0.05) == doctest::Approx(1.959963984540054));
  CHECK(normal_critical_value(0.05, Alternative::Greater) == doctest::Approx(1.6448536269514722));
  CHECK(rejects(-2.0, 1.96, Alternative::TwoSided));
  CHECK_FALSE(rejects(-2.0, 1.64, Alternative::Greater));
  CHECK(rejects(1.7, 1.64, Alternative::Greater));
}

TEST_CASE("tau(sigma hat) matches a direct evaluation") {
  const auto s = heteroskedastic_sample(1, 150);
  for (const auto& k : {KernelSpec::epanechnikov(), KernelSpec::quartic()}) {
    for (double h : {0.1, 0.3}) {
      const auto o = tau_sigma_hat(s, k, h);
      CHECK(o.statistic == doctest::Approx(brute_tau(s, k, h)).epsilon(1e-11));
      CHECK(o.p_value == doctest::Approx(2.0 * NormalDist::survival(std::abs(o.statistic))));
      CHECK(o.values.at("h") == h);
    }
  }
}

TEST_CASE("tau(sigma hat) invariances") {
  const auto k = KernelSpec::epanechnikov();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto s = heteroskedastic_sample(seed, 200);
    const double base = tau_sigma_hat(s, k, 0.2).statistic;
    const RegressionSample<double> neg(-s.y(), s.x_lag());
    CHECK(tau_sigma_hat(neg, k, 0.2).statistic == -base);
    for (double c : {0.5, 2.0, 1024.0}) {
      const RegressionSample<double> scaled(c * s.y(), s.x_lag());
      CHECK(tau_sigma_hat(scaled, k, 0.2).statistic == base);
    }
    const RegressionSample<double> odd(3.7 * s.y(), s.x_lag());
    CHECK(tau_sigma_hat(odd, k, 0.2).statistic == doctest::Approx(base).epsilon(1e-13));
  }
}

TEST_CASE("tau(sigma hat) edge cases") {
  const auto k = KernelSpec::epanechnikov();
  const RegressionSample<double> zero(Series<double>::Zero(50), Series<double>::LinSpaced(50, -1, 1));
  const auto o = tau_sigma_hat(zero, k, 0.2);
  CHECK(o.statistic == 0.0);
  CHECK(o.p_value == 1.0);

  const auto s = heteroskedastic_sample(2, 40);
  CHECK_THROWS_AS(tau_sigma_hat(s, k, 0.01), Error);  // hT < 2
  CHECK_THROWS_AS(tau_sigma_hat(s, k, 1.0), Error);

  const auto path = tau_sigma_hat(s, k, 0.25, default_levels(), true);
  REQUIRE(path.volatility_path.has_value());
  CHECK(path.volatility_path->size() == 40);

  const auto flagged = tau_sigma_hat(heteroskedastic_sample(3, 2000), k, BandwidthSpec::rate(1.0, 0.7));
  CHECK(flagged.warnings.size() == 1);
  const auto uniform = tau_sigma_hat(heteroskedastic_sample(3, 2000), KernelSpec::uniform(), BandwidthSpec::default_rule());
  CHECK(uniform.warnings.size() == 1);
}

TEST_CASE("degenerate estimated volatility is reported") {
  // Both columns are zero early on, so the residuals there vanish exactly.
  Series<double> x = Series<double>::Zero(100);
  Series<double> y = Series<double>::Zero(100);
  x.tail(10) = Series<double>::LinSpaced(10, 1.0, 10.0);
  y.tail(10) = Series<double>::LinSpaced(10, 3.0, -2.0);
  const RegressionSample<double> s(y, x);
  CHECK_THROWS_AS(tau_sigma_hat(s, KernelSpec::epanechnikov(), 0.2), Error);
}

TEST_CASE("oracle statistic") {
  const auto s = heteroskedastic_sample(4, 100);
  Series<double> vol(100);
  for (Eigen::Index t = 0; t < 100; ++t) vol[t] = t < 50 ? 1.0 : 3.0;
  double sum = 0.0;
  for (Eigen::Index t = 0; t < 100; ++t) sum += (s.x_lag()[t] >= 0 ? 1.0 : -1.0) * s.y()[t] / vol[t];
  CHECK(tau_oracle(s, vol).statistic == doctest::Approx(sum / 10.0).epsilon(1e-14));
  CHECK_THROWS_AS(tau_oracle(s, Series<double>(vol.head(99))), Error);
  vol[3] = 0.0;
  CHECK_THROWS_AS(tau_oracle(s, vol), Error);
}

TEST_CASE("nonlinear IV statistic") {
  const auto s = heteroskedastic_sample(5, 80);
  // With the sign instrument Σγ² = T, so the statistic is the unit-volatility oracle.
  const auto sign_stat = tau_nonlinear(s, GammaTransform<double>::sign()).statistic;
  CHECK(sign_stat == doctest::Approx(tau_oracle(s, Series<double>(Series<double>::Ones(80))).statistic).epsilon(1e-14));
  const auto id = tau_nonlinear(s, GammaTransform<double>::identity());
  CHECK(id.statistic == doctest::Approx(s.x_lag().dot(s.y()) / s.x_lag().norm()).epsilon(1e-13));
  const auto custom = GammaTransform<double>::custom([](double v) { return std::tanh(v); });
  double num = 0.0, g2 = 0.0;
  for (Eigen::Index t = 0; t < 80; ++t) {
    num += std::tanh(s.x_lag()[t]) * s.y()[t];
    g2 += std::pow(std::tanh(s.x_lag()[t]), 2);
  }
  CHECK(tau_nonlinear(s, custom).statistic == doctest::Approx(num / std::sqrt(g2)).epsilon(1e-13));
  const RegressionSample<double> flat(s.y(), Series<double>::Zero(80));
  CHECK_THROWS_AS(tau_nonlinear(flat, GammaTransform<double>::identity()), Error);
}

TEST_CASE("OLS t statistic") {
  const auto s = heteroskedastic_sample(6, 90);
  const double sxx = s.x_lag().squaredNorm();
  const double b = s.x_lag().dot(s.y()) / sxx;
  const double ssr = (s.y() - b * s.x_lag()).squaredNorm();
  const double t = b * std::sqrt(sxx) / std::sqrt(ssr / 89.0);
  const auto two = ols_t_stat(s);
  CHECK(two.statistic == doctest::Approx(t).epsilon(1e-12));
  const auto one = ols_t_stat(s, Alternative::Greater);
  CHECK(one.p_value == doctest::Approx(NormalDist::survival(t)).epsilon(1e-12));

  const Series<double> x = Series<double>::LinSpaced(10, 1.0, 10.0);
  const RegressionSample<double> exact(Series<double>(2.0 * x), x);
  const auto inf = ols_t_stat(exact, Alternative::Greater);
  CHECK(std::isinf(inf.statistic));
  CHECK(inf.p_value == 0.0);
  CHECK(inf.rejected_at.at(0.05));
}

TEST_CASE("size-adjusted critical value") {
  std::vector<double> draws(1000);
  std::iota(draws.begin(), draws.end(), 1.0);
  const double cv = size_adjusted_cv(draws, 0.05);
  CHECK(cv == 950.0);
  const auto hits = std::count_if(draws.begin(), draws.end(), [&](double d) { return rejects(d, cv, Alternative::TwoSided); });
  CHECK(hits == 50);

  for (auto& d : draws) d = -d;
  CHECK(size_adjusted_cv(draws, 0.05) == 950.0);  // two-sided uses |s|
  CHECK(size_adjusted_cv(draws, 0.05, Alternative::Greater) == -51.0);

  CHECK_THROWS_AS(size_adjusted_cv(std::vector<double>(999, 1.0), 0.05), Error);
  CHECK_THROWS_AS(size_adjusted_cv(draws, 0.0), Error);
}

TEST_CASE("KS distance to the normal") {
  const int n = 400;
  std::vector<double> q(n);
  for (int i = 0; i < n; ++i) q[i] = NormalDist::quantile((i + 0.5) / n);
  CHECK(ks_distance_normal(q) == doctest::Approx(0.5 / n).epsilon(1e-9));
  std::vector<double> shifted(q);
  for (auto& v : shifted) v += 1.0;
  CHECK(ks_distance_normal(shifted) > 0.35);
}

TEST_CASE("rejection map follows the levels") {
  const auto s = heteroskedastic_sample(7, 100);
  const std::vector<double> levels{0.2, 0.5};
  const auto o = tau_sigma_hat(s, KernelSpec::epanechnikov(), 0.2, levels);
  REQUIRE(o.rejected_at.size() == 2);
  CHECK(o.rejected_at.at(0.2) == (o.p_value < 0.2));
  CHECK(o.rejected_at.at(0.5) == (o.p_value < 0.5));
}
