#include "predrobust/core.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace predrobust;

namespace {

Series<double> seq(std::initializer_list<double> v) {
  Series<double> s(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) s[i++] = d;
  return s;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidConfig;
}

}  // namespace

TEST_CASE("regression sample rejects malformed input") {
  CHECK(code_of([] { RegressionSample<double>(seq({1, 2, 3, 4}), seq({1, 2, 3})); }) == ErrorCode::LengthMismatch);
  CHECK(code_of([] { RegressionSample<double>(seq({1, 2, 3}), seq({1, 2, 3})); }) == ErrorCode::TooShort);
  CHECK(code_of([] { RegressionSample<double>(seq({1, 2, NAN, 4}), seq({1, 2, 3, 4})); }) == ErrorCode::NonFinite);
  CHECK(code_of([] { RegressionSample<double>(seq({1, 2, 3, 4}), seq({1, INFINITY, 3, 4})); }) ==
        ErrorCode::NonFinite);
}

TEST_CASE("build_sample lags the predictor by one row") {
  const auto s = build_sample<double>(std::vector<double>{10, 11, 12, 13, 14, 15},
                                      std::vector<double>{0, 1, 2, 3, 4, 5});
  REQUIRE(s.size() == 5);
  for (Eigen::Index t = 0; t < 5; ++t) {
    CHECK(s.y()[t] == 11 + t);
    CHECK(s.x_lag()[t] == t);
  }
  CHECK_THROWS_AS(build_sample<double>(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 2, 3, 4}), Error);
}

TEST_CASE("recursive demeaning subtracts strictly earlier means") {
  const Series<double> y = seq({3, -1, 4, 1, -5, 9, 2});
  const Series<double> x = seq({0, 2, 7, 1, 8, 2, 8});
  const RegressionSample<double> s(y, x);
  const auto both = recursive_demean(s, Demeaning::Recursive);
  const auto pred = recursive_demean(s, Demeaning::RecursivePredictor);
  REQUIRE(both.size() == 6);
  REQUIRE(pred.size() == 6);
  for (Eigen::Index i = 1; i < 7; ++i) {
    double my = 0, mx = 0;
    for (Eigen::Index j = 0; j < i; ++j) {
      my += y[j];
      mx += x[j];
    }
    my /= static_cast<double>(i);
    mx /= static_cast<double>(i);
    CHECK(both.y()[i - 1] == doctest::Approx(y[i] - my).epsilon(1e-14));
    CHECK(both.x_lag()[i - 1] == doctest::Approx(x[i] - mx).epsilon(1e-14));
    CHECK(pred.y()[i - 1] == y[i]);
    CHECK(pred.x_lag()[i - 1] == both.x_lag()[i - 1]);
  }
}

TEST_CASE("demeaning modes: none, full sample, minimum length") {
  const RegressionSample<double> s(seq({1, 2, 3, 4, 5}), seq({2, 4, 6, 8, 10}));
  const auto none = demean(s, Demeaning::None);
  CHECK(none.y() == s.y());
  const auto full = demean(s, Demeaning::FullSample);
  CHECK(full.y().sum() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(full.x_lag().sum() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(recursive_demean(s).size() == 4);

  const RegressionSample<double> four(seq({1, 2, 3, 4}), seq({1, 2, 3, 4}));
  CHECK(code_of([&] { recursive_demean(four); }) == ErrorCode::TooShort);

  for (auto d : {Demeaning::None, Demeaning::Recursive, Demeaning::RecursivePredictor, Demeaning::FullSample}) {
    CHECK(parse_demeaning(to_string(d)) == d);
  }
  CHECK_FALSE(parse_demeaning("sideways").has_value());
}

TEST_CASE("bandwidth specification") {
  SUBCASE("rate rule arithmetic") {
    const auto bw = BandwidthSpec::rate(1.0, 0.333);
    CHECK(bw.resolve(600) == doctest::Approx(std::pow(600.0, -0.333)).epsilon(1e-15));
    CHECK(bw.resolve(600) == doctest::Approx(0.119).epsilon(0.005));
    CHECK(bw.admissible());
  }
  SUBCASE("default rule") {
    const auto bw = BandwidthSpec::default_rule();
    CHECK(bw.mode() == BandwidthSpec::Mode::RateRule);
    CHECK(bw.exponent() == doctest::Approx(1.0 / 3.0));
    CHECK(bw.resolve(1000) == doctest::Approx(bw.constant() / 10.0));
  }
  SUBCASE("invalid inputs") {
    CHECK(code_of([] { BandwidthSpec::explicit_h(0.0); }) == ErrorCode::InvalidBandwidth);
    CHECK(code_of([] { BandwidthSpec::explicit_h(1.0); }) == ErrorCode::InvalidBandwidth);
    CHECK(code_of([] { BandwidthSpec::rate(-1.0, 0.3); }) == ErrorCode::InvalidBandwidth);
    CHECK(code_of([] { BandwidthSpec::rate(1.0, 1.0); }) == ErrorCode::InvalidBandwidth);
    // h*T below two observations
    CHECK(code_of([] { BandwidthSpec::explicit_h(0.1).resolve(10); }) == ErrorCode::InvalidBandwidth);
    // c large enough that h >= 1
    CHECK(code_of([] { BandwidthSpec::rate(5.0, 0.2).resolve(10); }) == ErrorCode::InvalidBandwidth);
  }
  SUBCASE("exponents beyond one half resolve but are flagged") {
    const auto bw = BandwidthSpec::rate(1.0, 0.7);
    CHECK_FALSE(bw.admissible());
    CHECK(bw.resolve(10000) > 0.0);
  }
}

TEST_CASE("kernel specification") {
  CHECK(KernelSpec::epanechnikov().is_lipschitz());
  CHECK(KernelSpec::quartic().is_lipschitz());
  CHECK_FALSE(KernelSpec::uniform().is_lipschitz());
  CHECK(code_of([] { KernelSpec::make(KernelFamily::OneSidedUniform); }) == ErrorCode::InvalidKernel);
  for (auto f : {KernelFamily::OneSidedEpanechnikov, KernelFamily::OneSidedQuartic, KernelFamily::OneSidedUniform}) {
    CHECK(parse_kernel_family(to_string(f)) == f);
  }
}

TEST_CASE("volatility path must be positive") {
  CHECK_NOTHROW(VolatilityPath<double>(seq({1, 2, 3}), VolatilityKind::Estimated));
  CHECK(code_of([] { VolatilityPath<double>(seq({1, 0, 3}), VolatilityKind::Estimated); }) ==
        ErrorCode::ZeroVolatility);
  CHECK(code_of([] { VolatilityPath<double>(seq({1, -2, 3}), VolatilityKind::Estimated); }) ==
        ErrorCode::ZeroVolatility);
}

TEST_CASE("method names round-trip") {
  for (auto m : {Method::TauSigmaHat, Method::TauOracle, Method::TauNonlinearIV, Method::OlsT}) {
    CHECK(parse_method(to_string(m)) == m);
  }
  CHECK(parse_method("tau") == Method::TauSigmaHat);
  CHECK(parse_method("ols") == Method::OlsT);
  CHECK_FALSE(parse_method("bq").has_value());
}

TEST_CASE("seed derivation") {
  const Seed a{42};
  CHECK(a.substream(0, 0) == Seed{42}.substream(0, 0));
  std::set<std::uint64_t> seen;
  for (std::uint64_t r = 0; r < 200; ++r) {
    for (std::uint64_t c = 0; c < 5; ++c) seen.insert(a.substream(r, c));
  }
  CHECK(seen.size() == 1000);
  CHECK(Seed{1}.substream(3, 0) != Seed{2}.substream(3, 0));

  auto g1 = a.rng(7, 3);
  auto g2 = a.rng(7, 3);
  for (int i = 0; i < 10; ++i) CHECK(g1() == g2());
}

TEST_CASE("mix64 is a bijection on a sample") {
  std::set<std::uint64_t> out;
  for (std::uint64_t i = 0; i < 10000; ++i) out.insert(mix64(i));
  CHECK(out.size() == 10000);
  static_assert(mix64(0) != 0);
}

TEST_CASE("error message carries the code name") {
  const Error e(ErrorCode::TooShort, "need more data");
  CHECK(std::string(e.what()) == "TooShort: need more data");
  CHECK(e.code() == ErrorCode::TooShort);
}
