#pragma once

#include "predrobust/core.hpp"
#include "predrobust/kernels.hpp"

#include <functional>

namespace predrobust {

/// sgn with sgn(0) = +1.
template <typename Scalar>
constexpr Scalar sign(Scalar x) noexcept {
  return x >= Scalar(0) ? Scalar(1) : Scalar(-1);
}

/// Instrument transform γ for the nonlinear IV family.
template <typename Scalar = double>
class GammaTransform {
 public:
  enum class Kind { Sign, Identity, Custom };

  static GammaTransform sign() { return GammaTransform(Kind::Sign, {}); }
  static GammaTransform identity() { return GammaTransform(Kind::Identity, {}); }
  static GammaTransform custom(std::function<Scalar(Scalar)> fn) { return GammaTransform(Kind::Custom, std::move(fn)); }

  Kind kind() const noexcept { return kind_; }

  Scalar operator()(Scalar x) const {
    switch (kind_) {
      case Kind::Sign: return predrobust::sign(x);
      case Kind::Identity: return x;
      case Kind::Custom: return fn_(x);
    }
    return x;
  }

 private:
  GammaTransform(Kind kind, std::function<Scalar(Scalar)> fn) : kind_(kind), fn_(std::move(fn)) {}
  Kind kind_;
  std::function<Scalar(Scalar)> fn_;
};

namespace detail {

template <typename Scalar>
struct IvSums {
  Scalar numerator = 0;    // Σ γ(x_{t-1}) y_t
  Scalar denominator = 0;  // Σ γ(x_{t-1}) x_{t-1}
  Scalar instrument_sq = 0;  // Σ γ(x_{t-1})^2
};

// One accumulation loop shared by OLS, Cauchy and general IV so that the
// identity and sign reductions agree bit for bit.
template <typename Scalar, typename Gamma>
IvSums<Scalar> iv_sums(const RegressionSample<Scalar>& sample, Gamma&& gamma) {
  IvSums<Scalar> s;
  const auto& y = sample.y();
  const auto& x = sample.x_lag();
  for (Eigen::Index t = 0; t < sample.size(); ++t) {
    const Scalar g = gamma(x[t]);
    s.numerator += g * y[t];
    s.denominator += g * x[t];
    s.instrument_sq += g * g;
  }
  return s;
}

}  // namespace detail

/// β̂ = Σ x_{t-1} y_t / Σ x_{t-1}^2 (no intercept).
template <typename Scalar>
Scalar ols_fit(const RegressionSample<Scalar>& sample) {
  const auto s = detail::iv_sums(sample, [](Scalar x) { return x; });
  if (s.denominator == Scalar(0)) {
    throw Error(ErrorCode::DegenerateRegressor, "predictor is identically zero");
  }
  return s.numerator / s.denominator;
}

/// β̌ = Σ sgn(x_{t-1}) y_t / Σ |x_{t-1}|.
template <typename Scalar>
Scalar cauchy_fit(const RegressionSample<Scalar>& sample) {
  const auto s = detail::iv_sums(sample, [](Scalar x) { return sign(x); });
  if (s.denominator == Scalar(0)) {
    throw Error(ErrorCode::DegenerateRegressor, "predictor is identically zero");
  }
  return s.numerator / s.denominator;
}

template <typename Scalar>
Scalar nonlinear_iv_fit(const RegressionSample<Scalar>& sample, const GammaTransform<Scalar>& gamma) {
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
  if (s.denominator == Scalar(0)) {
    throw Error(ErrorCode::DegenerateInstrument, "Σ γ(x) x is zero");
  }
  return s.numerator / s.denominator;
}

// ---------------------------------------------------------------------------
// One-sided kernel volatility estimator

namespace detail {

/// Kernel-weighted mean of `values` at r (no boundary rule, no error on zero).
/// Returns {Σ v_t w_t, Σ w_t}.
template <typename Scalar, typename Values>
std::pair<Scalar, Scalar> kernel_average_parts(const Values& values, Scalar r, const KernelSpec& kernel, Scalar h) {
  const Eigen::Index T = values.size();
  const Scalar rT = r * static_cast<Scalar>(T);
  const Scalar hT = h * static_cast<Scalar>(T);
  const auto [first, last] = window_range(static_cast<double>(rT), static_cast<double>(hT), T);
  Scalar num = 0;
  Scalar den = 0;
  for (Eigen::Index t = first; t <= last; ++t) {
    const Scalar w = kernel_value(kernel, kernel_argument(rT, hT, t));
    num += values[t - 1] * w;
    den += w;
  }
  return {num, den};
}

template <typename Scalar>
Scalar raw_volatility_sq(const Series<Scalar>& residuals_sq, Scalar r, const KernelSpec& kernel, Scalar h) {
  const Scalar at = r < h ? h : r;
  const auto [num, den] = kernel_average_parts(residuals_sq, at, kernel, h);
  if (!(den > Scalar(0))) {
    throw Error(ErrorCode::EmptyWindow, "no observation receives positive kernel weight at r=" +
                                            std::to_string(static_cast<double>(at)) + " (h*T too small)");
  }
  return num / den;
}

/// σ̂²((t-1)/T) for t = 1..T.
template <typename Scalar>
Series<Scalar> volatility_sq_path(const Series<Scalar>& residuals_sq, const KernelSpec& kernel, Scalar h) {
  const Eigen::Index T = residuals_sq.size();
  Series<Scalar> out(T);
  std::optional<Scalar> boundary;
  for (Eigen::Index t = 1; t <= T; ++t) {
    const Scalar r = static_cast<Scalar>(t - 1) / static_cast<Scalar>(T);
    if (r < h) {
      if (!boundary) boundary = raw_volatility_sq(residuals_sq, h, kernel, h);
      out[t - 1] = *boundary;
    } else {
      out[t - 1] = raw_volatility_sq(residuals_sq, r, kernel, h);
    }
  }
  return out;
}

template <typename Scalar>
Series<Scalar> squared_residuals(const RegressionSample<Scalar>& sample, Scalar beta) {
  return (sample.y() - beta * sample.x_lag()).array().square().matrix();
}

}  // namespace detail

/// σ̂²(r) = Σ û²_t K_h(r - t/T) / Σ K_h(r - t/T) for r >= h, and σ̂²(h) for r < h.
template <typename Scalar>
Scalar volatility_estimate(const Series<Scalar>& residuals_sq, Scalar r, const KernelSpec& kernel, Scalar h) {
  if (residuals_sq.size() == 0 || (residuals_sq.array() < Scalar(0)).any()) {
    throw Error(ErrorCode::InvalidConfig, "squared residuals must be non-empty and non-negative");
  }
  const Scalar v = detail::raw_volatility_sq(residuals_sq, r, kernel, h);
  if (v == Scalar(0)) {
    throw Error(ErrorCode::ZeroVolatility, "all in-window residuals are zero at r=" +
                                               std::to_string(static_cast<double>(r)));
  }
  return v;
}

/// σ̂ on the grid r_t = (t-1)/T using residuals û_t = y_t - β x_{t-1}.
template <typename Scalar>
VolatilityPath<Scalar> volatility_path(const RegressionSample<Scalar>& sample, Scalar beta_for_residuals,
                                       const KernelSpec& kernel, Scalar h) {
  const Series<Scalar> sq = detail::volatility_sq_path(detail::squared_residuals(sample, beta_for_residuals), kernel, h);
  if ((sq.array() <= Scalar(0)).any()) {
    throw Error(ErrorCode::ZeroVolatility, "estimated volatility is zero somewhere on the grid");
  }
  return VolatilityPath<Scalar>(sq.array().sqrt().matrix(), VolatilityKind::Estimated);
}

template <typename Scalar = double>
struct VolatilityDecomposition {
  Scalar conditional;    // σ̂₁²: kernel average of v_t²
  Scalar martingale;     // σ̂₂²: kernel average of u_t² - v_t²
  Scalar slope_squared;  // σ̂₃²: (β̂-β)² times kernel average of x²
  Scalar cross;          // σ̂₄²: -2(β̂-β) times kernel average of x u

  Scalar total() const { return conditional + martingale + slope_squared + cross; }
};

/// Splits σ̂²(r) into its four components given the simulation ground truth.
/// û_t = u_t - (β̂-β)x_{t-1}, so the cross term enters with a minus sign.
/// `beta_hat` defaults to the OLS fit of the sample.
template <typename Scalar>
VolatilityDecomposition<Scalar> decompose_volatility(const RegressionSample<Scalar>& sample, Scalar true_beta,
                                                     const VolatilityPath<Scalar>& true_vol,
                                                     const Series<Scalar>& true_eps, const KernelSpec& kernel,
                                                     Scalar h, Scalar r,
                                                     std::optional<Scalar> beta_hat = std::nullopt) {
  const Eigen::Index T = sample.size();
  if (true_vol.size() != T || true_eps.size() != T) {
    throw Error(ErrorCode::LengthMismatch, "ground-truth series must match the sample length");
  }
  const Scalar b_hat = beta_hat ? *beta_hat : ols_fit(sample);
  const Scalar diff = b_hat - true_beta;
  const Series<Scalar> v2 = true_vol.values().array().square().matrix();
  const Series<Scalar> u = true_vol.values().cwiseProduct(true_eps);
  const Series<Scalar> u2_minus_v2 = (u.array().square() - v2.array()).matrix();
  const Series<Scalar> x2 = sample.x_lag().array().square().matrix();
  const Series<Scalar> xu = sample.x_lag().cwiseProduct(u);

  const Scalar at = r < h ? h : r;
  const auto [n1, den] = detail::kernel_average_parts(v2, at, kernel, h);
  if (!(den > Scalar(0))) {
    throw Error(ErrorCode::EmptyWindow, "no observation receives positive kernel weight at r=" +
                                            std::to_string(static_cast<double>(at)));
  }
  const Scalar n2 = detail::kernel_average_parts(u2_minus_v2, at, kernel, h).first;
  const Scalar n3 = detail::kernel_average_parts(x2, at, kernel, h).first;
  const Scalar n4 = detail::kernel_average_parts(xu, at, kernel, h).first;
  return {n1 / den, n2 / den, diff * diff * n3 / den, Scalar(-2) * diff * n4 / den};
}

}  // namespace predrobust
