#pragma once

#include "predrobust/core.hpp"
#include "predrobust/estimators.hpp"
#include "predrobust/normal.hpp"

#include <algorithm>
#include <span>

namespace predrobust {

/// Relative floor below which an estimated variance counts as degenerate.
inline constexpr double kVolatilityFloor = 1e-12;

namespace detail {

inline double normal_p_value(double statistic, Alternative alt) {
  if (std::isnan(statistic)) return 1.0;
  if (alt == Alternative::Greater) return NormalDist::survival(statistic);
  return std::min(1.0, 2.0 * NormalDist::survival(std::abs(statistic)));
}

inline void finish_outcome(TestOutcome& out, std::span<const double> levels) {
  out.p_value = normal_p_value(out.statistic, out.alternative);
  for (const double level : levels) out.rejected_at[level] = out.p_value < level;
}

}  // namespace detail

/// Normal critical value for a test at `level`.
inline double normal_critical_value(double level, Alternative alt = Alternative::TwoSided) {
  return alt == Alternative::TwoSided ? NormalDist::quantile(1.0 - 0.5 * level) : NormalDist::quantile(1.0 - level);
}

inline bool rejects(double statistic, double critical_value, Alternative alt) {
  return alt == Alternative::TwoSided ? std::abs(statistic) > critical_value : statistic > critical_value;
}

/// Feasible statistic τ(σ̂) = T^{-1/2} Σ sgn(x_{t-1}) y_t / σ̂((t-1)/T) with σ̂
/// built from full-sample OLS residuals.
template <typename Scalar>
TestOutcome tau_sigma_hat(const RegressionSample<Scalar>& sample, const KernelSpec& kernel, Scalar h,
                          std::span<const double> levels = default_levels(), bool keep_path = false) {
  TestOutcome out;
  out.method = Method::TauSigmaHat;
  out.values["h"] = static_cast<double>(h);
  const Eigen::Index T = sample.size();
  if (!(h > Scalar(0) && h < Scalar(1)) || h * static_cast<Scalar>(T) < Scalar(2)) {
    throw Error(ErrorCode::InvalidBandwidth, "bandwidth h=" + std::to_string(static_cast<double>(h)) +
                                                 " invalid for T=" + std::to_string(T));
  }
  if (sample.y().isZero(0)) {
    // Every term of the numerator vanishes whatever the volatility estimate.
    out.statistic = 0.0;
    detail::finish_outcome(out, levels);
    return out;
  }
  const Scalar beta_hat = ols_fit(sample);
  out.values["beta_ols"] = static_cast<double>(beta_hat);
  const Series<Scalar> res_sq = detail::squared_residuals(sample, beta_hat);
  const Series<Scalar> vol_sq = detail::volatility_sq_path(res_sq, kernel, h);
  const Scalar floor = Scalar(kVolatilityFloor) * res_sq.maxCoeff();
  if (!(vol_sq.minCoeff() > floor)) {
    throw Error(ErrorCode::DegenerateVolatility,
                "estimated volatility collapses below 1e-12 of the largest squared residual");
  }
  const auto& y = sample.y();
  const auto& x = sample.x_lag();
  Scalar sum = 0;
  for (Eigen::Index t = 0; t < T; ++t) sum += sign(x[t]) * y[t] / std::sqrt(vol_sq[t]);
  out.statistic = static_cast<double>(sum / std::sqrt(static_cast<Scalar>(T)));
  if (keep_path) {
    std::vector<double> path(static_cast<std::size_t>(T));
    for (Eigen::Index t = 0; t < T; ++t) path[static_cast<std::size_t>(t)] = static_cast<double>(std::sqrt(vol_sq[t]));
    out.volatility_path = std::move(path);
  }
  detail::finish_outcome(out, levels);
  return out;
}

template <typename Scalar>
TestOutcome tau_sigma_hat(const RegressionSample<Scalar>& sample, const KernelSpec& kernel,
                          const BandwidthSpec& bandwidth, std::span<const double> levels = default_levels(),
                          bool keep_path = false) {
  const Scalar h = static_cast<Scalar>(bandwidth.resolve(sample.size()));
  TestOutcome out = tau_sigma_hat(sample, kernel, h, levels, keep_path);
  if (!bandwidth.admissible()) {
    out.warnings.emplace_back("bandwidth exponent outside (0, 1/2); asymptotic validity not covered");
  }
  if (!kernel.is_lipschitz()) {
    out.warnings.emplace_back("kernel is not Lipschitz on the real line");
  }
  return out;
}

/// Infeasible statistic τ(v) = T^{-1/2} Σ sgn(x_{t-1}) y_t / v_t.
template <typename Scalar>
TestOutcome tau_oracle(const RegressionSample<Scalar>& sample, const Series<Scalar>& true_vol,
                       std::span<const double> levels = default_levels()) {
  const Eigen::Index T = sample.size();
  if (true_vol.size() != T) {
    throw Error(ErrorCode::LengthMismatch, "true volatility length differs from the sample");
  }
  if (!true_vol.allFinite() || !(true_vol.minCoeff() > Scalar(0))) {
    throw Error(ErrorCode::ZeroVolatility, "true volatility must be strictly positive");
  }
  TestOutcome out;
  out.method = Method::TauOracle;
  const auto& y = sample.y();
  const auto& x = sample.x_lag();
  Scalar sum = 0;
  for (Eigen::Index t = 0; t < T; ++t) sum += sign(x[t]) * y[t] / true_vol[t];
  out.statistic = static_cast<double>(sum / std::sqrt(static_cast<Scalar>(T)));
  detail::finish_outcome(out, levels);
  return out;
}

template <typename Scalar>
TestOutcome tau_oracle(const RegressionSample<Scalar>& sample, const VolatilityPath<Scalar>& true_vol,
                       std::span<const double> levels = default_levels()) {
  return tau_oracle(sample, true_vol.values(), levels);
}

/// τ̃(γ) = (Σ γ(x) x / (Σ γ(x)²)^{1/2}) β̃(γ), evaluated as Σ γ(x) y / (Σ γ(x)²)^{1/2}.
template <typename Scalar>
TestOutcome tau_nonlinear(const RegressionSample<Scalar>& sample, const GammaTransform<Scalar>& gamma,
                          std::span<const double> levels = default_levels()) {
  detail::IvSums<Scalar> s;
  switch (gamma.kind()) {
    case GammaTransform<Scalar>::Kind::Identity:
      s = detail::iv_sums(sample, [](Scalar x) { return x; });
      break;
    case GammaTransform<Scalar>::Kind::Sign:
      s = detail::iv_sums(sample, [](Scalar x) { return sign(x); });
      break;
    case GammaTransform<Scalar>::Kind::Custom:
      s = detail::iv_sums(sample, gamma);
      break;
  }
  if (!(s.instrument_sq > Scalar(0))) {
    throw Error(ErrorCode::DegenerateInstrument, "Σ γ(x)^2 is zero");
  }
  TestOutcome out;
  out.method = Method::TauNonlinearIV;
  out.statistic = static_cast<double>(s.numerator / std::sqrt(s.instrument_sq));
  if (s.denominator != Scalar(0)) out.values["beta_iv"] = static_cast<double>(s.numerator / s.denominator);
  detail::finish_outcome(out, levels);
  return out;
}

/// Conventional homoskedastic t-ratio t = β̂ (Σx²)^{1/2} / s with
/// s² = (T-1)^{-1} Σ û². Exactly fitting data give an infinite statistic.
template <typename Scalar>
TestOutcome ols_t_stat(const RegressionSample<Scalar>& sample, Alternative alt = Alternative::TwoSided,
                       std::span<const double> levels = default_levels()) {
  const Eigen::Index T = sample.size();
  const Scalar sxx = sample.x_lag().squaredNorm();
  if (sxx == Scalar(0)) {
    throw Error(ErrorCode::DegenerateRegressor, "predictor is identically zero");
  }
  const Scalar beta_hat = ols_fit(sample);
  const Scalar ssr = detail::squared_residuals(sample, beta_hat).sum();
  const Scalar s = std::sqrt(ssr / static_cast<Scalar>(T - 1));
  TestOutcome out;
  out.method = Method::OlsT;
  out.alternative = alt;
  out.values["beta_ols"] = static_cast<double>(beta_hat);
  if (s == Scalar(0)) {
    out.statistic = beta_hat == Scalar(0) ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(),
                                                                static_cast<double>(beta_hat));
    out.warnings.emplace_back("zero residual variance");
  } else {
    out.statistic = static_cast<double>(beta_hat * std::sqrt(sxx) / s);
  }
  detail::finish_outcome(out, levels);
  if (std::isinf(out.statistic)) {
    out.p_value = (alt == Alternative::Greater && out.statistic < 0) ? 1.0 : 0.0;
    for (auto& [level, rejected] : out.rejected_at) rejected = out.p_value < level;
  }
  return out;
}

inline constexpr std::size_t kMinNullDraws = 1000;

/// Empirical (1-level) quantile of |statistic| (or of the statistic itself for
/// one-sided tests): the smallest order statistic s_(k) with k = ceil((1-level) n).
/// Rejecting when the statistic strictly exceeds it reproduces `level` on the
/// same draws whenever level*n is an integer.
inline double size_adjusted_cv(std::span<const double> null_statistics, double level,
                               Alternative alt = Alternative::TwoSided) {
  if (null_statistics.size() < kMinNullDraws) {
    throw Error(ErrorCode::InsufficientNullDraws, "need at least " + std::to_string(kMinNullDraws) +
                                                      " null statistics, got " +
                                                      std::to_string(null_statistics.size()));
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "level must lie in (0, 1)");
  }
  std::vector<double> v(null_statistics.begin(), null_statistics.end());
  if (alt == Alternative::TwoSided) {
    for (double& s : v) s = std::abs(s);
  }
  const auto n = static_cast<double>(v.size());
  auto k = static_cast<std::size_t>(std::ceil((1.0 - level) * n - 1e-9));
  k = std::clamp<std::size_t>(k, 1, v.size());
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end());
  return v[k - 1];
}

/// Kolmogorov-Smirnov distance sup |F_n - Φ|.
inline double ks_distance_normal(std::span<const double> draws) {
  std::vector<double> v(draws.begin(), draws.end());
  std::sort(v.begin(), v.end());
  const auto n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = NormalDist::cdf(v[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace predrobust
