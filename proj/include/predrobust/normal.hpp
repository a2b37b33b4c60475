#pragma once

namespace predrobust {

/// Standard normal distribution.
struct NormalDist {
  static double pdf(double x);
  static double cdf(double x);
  /// Upper tail 1 - Φ(x) without cancellation for large x.
  static double survival(double x);
  /// Φ^-1(p) for p in (0, 1); ±inf at the endpoints.
  static double quantile(double p);
};

}  // namespace predrobust
