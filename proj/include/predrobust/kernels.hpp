#pragma once

#include "predrobust/core.hpp"

#include <algorithm>
#include <cmath>
#include <span>

namespace predrobust {

/// K(s) for the one-sided families; exactly zero outside [0, 1].
template <typename Scalar>
Scalar kernel_value(const KernelSpec& spec, Scalar s) {
  if (!(s >= Scalar(0) && s <= Scalar(1))) return Scalar(0);
  switch (spec.family) {
    case KernelFamily::OneSidedEpanechnikov:
      return Scalar(6) * s * (Scalar(1) - s);
    case KernelFamily::OneSidedQuartic: {
      const Scalar q = s * (Scalar(1) - s);
      return Scalar(30) * q * q;
    }
    case KernelFamily::OneSidedUniform:
      return Scalar(1);
  }
  return Scalar(0);
}

/// Selects f = K or f = K^2 for the Riemann-sum routines.
enum class KernelPower { One, Two };

template <typename Scalar>
Scalar kernel_power_value(const KernelSpec& spec, Scalar s, KernelPower power) {
  const Scalar k = kernel_value(spec, s);
  return power == KernelPower::One ? k : k * k;
}

/// ∫_0^1 f(s) ds in closed form.
inline double kernel_integral(const KernelSpec& spec, KernelPower power) {
  if (power == KernelPower::One) return 1.0;
  switch (spec.family) {
    case KernelFamily::OneSidedEpanechnikov: return 36.0 / 30.0;
    case KernelFamily::OneSidedQuartic: return 900.0 / 630.0;
    case KernelFamily::OneSidedUniform: return 1.0;
  }
  return 1.0;
}

/// ∫_0^u f(s) ds for u in [0, 1] (clamped outside).
inline double kernel_partial_integral(const KernelSpec& spec, double u, KernelPower power) {
  u = std::clamp(u, 0.0, 1.0);
  if (power == KernelPower::One) {
    switch (spec.family) {
      case KernelFamily::OneSidedEpanechnikov: return 3.0 * u * u - 2.0 * u * u * u;
      case KernelFamily::OneSidedQuartic: return 10.0 * std::pow(u, 3) - 15.0 * std::pow(u, 4) + 6.0 * std::pow(u, 5);
      case KernelFamily::OneSidedUniform: return u;
    }
  }
  switch (spec.family) {
    case KernelFamily::OneSidedEpanechnikov:
      // 36 (u^3/3 - u^4/2 + u^5/5)
      return 36.0 * (std::pow(u, 3) / 3.0 - std::pow(u, 4) / 2.0 + std::pow(u, 5) / 5.0);
    case KernelFamily::OneSidedQuartic:
      // 900 ∫ s^4 (1-s)^4
      return 900.0 * (std::pow(u, 5) / 5.0 - 4.0 * std::pow(u, 6) / 6.0 + 6.0 * std::pow(u, 7) / 7.0 -
                      4.0 * std::pow(u, 8) / 8.0 + std::pow(u, 9) / 9.0);
    case KernelFamily::OneSidedUniform: return u;
  }
  return 0.0;
}

namespace detail {

/// Scaled kernel argument (r - t/T)/h written as (rT - t)/(hT) so that grids
/// with r*T and h*T integral land exactly on the window endpoints.
template <typename Scalar>
Scalar kernel_argument(Scalar rT, Scalar hT, Eigen::Index t) {
  return (rT - static_cast<Scalar>(t)) / hT;
}

/// Index range [first, last] (1-based, clipped to 1..T) that can carry
/// positive weight at position r; endpoints are padded by one and the kernel
/// itself decides inclusion.
inline std::pair<Eigen::Index, Eigen::Index> window_range(double rT, double hT, Eigen::Index T) {
  const auto lo = static_cast<Eigen::Index>(std::floor(rT - hT)) - 1;
  const auto hi = static_cast<Eigen::Index>(std::ceil(rT)) + 1;
  return {std::max<Eigen::Index>(lo, 1), std::min<Eigen::Index>(hi, T)};
}

}  // namespace detail

/// w_t = K_h(r - t/T) = K((r - t/T)/h) for t = 1..T. Positive weight only
/// where t/T lies in [r - h, r].
template <typename Scalar>
Series<Scalar> weight_row(const KernelSpec& spec, Scalar h, Scalar r, Eigen::Index T,
                          KernelPower power = KernelPower::One) {
  Series<Scalar> w = Series<Scalar>::Zero(T);
  const Scalar rT = r * static_cast<Scalar>(T);
  const Scalar hT = h * static_cast<Scalar>(T);
  const auto [first, last] = detail::window_range(static_cast<double>(rT), static_cast<double>(hT), T);
  for (Eigen::Index t = first; t <= last; ++t) {
    w[t - 1] = kernel_power_value(spec, detail::kernel_argument(rT, hT, t), power);
  }
  if (r >= h && w.sum() <= Scalar(0)) {
    throw Error(ErrorCode::EmptyWindow, "no observation receives positive kernel weight at r=" +
                                            std::to_string(static_cast<double>(r)) + " (h*T too small)");
  }
  return w;
}

/// sup over the grid of |(hT)^-1 Σ_t f_h(r - t/T) - ∫_0^{r/h} f|. For r >= h
/// the integral is 1 when f = K.
template <typename Scalar>
Scalar riemann_sum_error(const KernelSpec& spec, Scalar h, Eigen::Index T, std::span<const Scalar> grid,
                         KernelPower power = KernelPower::One) {
  Scalar worst = 0;
  const Scalar hT = h * static_cast<Scalar>(T);
  for (const Scalar r : grid) {
    const Scalar rT = r * static_cast<Scalar>(T);
    const auto [first, last] = detail::window_range(static_cast<double>(rT), static_cast<double>(hT), T);
    Scalar sum = 0;
    for (Eigen::Index t = first; t <= last; ++t) {
      sum += kernel_power_value(spec, detail::kernel_argument(rT, hT, t), power);
    }
    const Scalar target = static_cast<Scalar>(kernel_partial_integral(spec, static_cast<double>(r / h), power));
    worst = std::max(worst, static_cast<Scalar>(std::abs(sum / hT - target)));
  }
  return worst;
}

}  // namespace predrobust
