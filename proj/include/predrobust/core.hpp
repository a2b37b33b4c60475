#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace predrobust {

enum class ErrorCode {
  LengthMismatch,
  TooShort,
  NonFinite,
  DegenerateRegressor,
  DegenerateInstrument,
  EmptyWindow,
  ZeroVolatility,
  DegenerateVolatility,
  InsufficientNullDraws,
  InvalidKernel,
  InvalidBandwidth,
  InvalidConfig,
  VolatilityUnderflow,
  TooManyFailures,
  FileNotFound,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure in the library is reported through this exception; `code()`
/// identifies the failure class so callers can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

template <typename Scalar>
using Series = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline constexpr Eigen::Index kMinSampleSize = 4;

/// Aligned predictive-regression pairs (y_t, x_{t-1}), t = 1..T.
template <typename Scalar = double>
class RegressionSample {
 public:
  RegressionSample(Series<Scalar> y, Series<Scalar> x_lag) : y_(std::move(y)), x_lag_(std::move(x_lag)) {
    if (y_.size() != x_lag_.size()) {
      throw Error(ErrorCode::LengthMismatch, "response has " + std::to_string(y_.size()) +
                                                 " values but predictor has " +
                                                 std::to_string(x_lag_.size()));
    }
    if (y_.size() < kMinSampleSize) {
      throw Error(ErrorCode::TooShort, "regression sample needs at least " +
                                           std::to_string(kMinSampleSize) + " pairs, got " +
                                           std::to_string(y_.size()));
    }
    if (!y_.allFinite() || !x_lag_.allFinite()) {
      throw Error(ErrorCode::NonFinite, "regression sample contains NaN or Inf");
    }
  }

  const Series<Scalar>& y() const noexcept { return y_; }
  const Series<Scalar>& x_lag() const noexcept { return x_lag_; }
  Eigen::Index size() const noexcept { return y_.size(); }

 private:
  Series<Scalar> y_;
  Series<Scalar> x_lag_;
};

/// Pairs y_t with x_{t-1} from two columns observed at the same dates. N raw
/// rows give T = N - 1 pairs.
template <typename Scalar>
RegressionSample<Scalar> build_sample(const Series<Scalar>& raw_y, const Series<Scalar>& raw_x) {
  if (raw_y.size() != raw_x.size()) {
    throw Error(ErrorCode::LengthMismatch, "columns y and x differ in length (" +
                                               std::to_string(raw_y.size()) + " vs " +
                                               std::to_string(raw_x.size()) + ")");
  }
  if (!raw_y.allFinite() || !raw_x.allFinite()) {
    throw Error(ErrorCode::NonFinite, "input series contains NaN or Inf");
  }
  const Eigen::Index n = raw_y.size();
  if (n - 1 < kMinSampleSize) {
    throw Error(ErrorCode::TooShort, "need at least " + std::to_string(kMinSampleSize + 1) +
                                         " observations, got " + std::to_string(n));
  }
  return RegressionSample<Scalar>(raw_y.tail(n - 1), raw_x.head(n - 1));
}

template <typename Scalar>
RegressionSample<Scalar> build_sample(const std::vector<Scalar>& raw_y, const std::vector<Scalar>& raw_x) {
  using Map = Eigen::Map<const Series<Scalar>>;
  return build_sample<Scalar>(Series<Scalar>(Map(raw_y.data(), static_cast<Eigen::Index>(raw_y.size()))),
                              Series<Scalar>(Map(raw_x.data(), static_cast<Eigen::Index>(raw_x.size()))));
}

enum class Demeaning {
  None,
  /// Both columns minus the running mean of strictly earlier values.
  Recursive,
  /// Only the predictor is recursively demeaned; the response is untouched.
  RecursivePredictor,
  /// Full-sample means removed from both columns (OLS with intercept).
  FullSample,
};

std::string_view to_string(Demeaning d);
std::optional<Demeaning> parse_demeaning(std::string_view name);

namespace detail {

// out[i] = v[i+1] - mean(v[0..i]) for i = 0..n-2
template <typename Scalar>
Series<Scalar> subtract_past_mean(const Series<Scalar>& v) {
  const Eigen::Index n = v.size();
  Series<Scalar> out(n - 1);
  Scalar running = 0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    running += v[i];
    out[i] = v[i + 1] - running / static_cast<Scalar>(i + 1);
  }
  return out;
}

}  // namespace detail

/// x~_{t-1} = x_{t-1} - mean(x_0..x_{t-2}) and y~_t = y_t - mean(y_1..y_{t-1}).
/// Only strictly earlier values enter each mean, so the first pair is consumed
/// and the output has T - 1 pairs.
template <typename Scalar>
RegressionSample<Scalar> recursive_demean(const RegressionSample<Scalar>& sample,
                                          Demeaning mode = Demeaning::Recursive) {
  const Eigen::Index n = sample.size();
  switch (mode) {
    case Demeaning::None:
      return sample;
    case Demeaning::FullSample: {
      Series<Scalar> y = sample.y().array() - sample.y().mean();
      Series<Scalar> x = sample.x_lag().array() - sample.x_lag().mean();
      return RegressionSample<Scalar>(std::move(y), std::move(x));
    }
    case Demeaning::Recursive:
    case Demeaning::RecursivePredictor:
      break;
  }
  if (n - 1 < kMinSampleSize) {
    throw Error(ErrorCode::TooShort, "recursive demeaning consumes one pair; need at least " +
                                         std::to_string(kMinSampleSize + 1) + ", got " +
                                         std::to_string(n));
  }
  Series<Scalar> x = detail::subtract_past_mean(sample.x_lag());
  Series<Scalar> y = mode == Demeaning::Recursive ? detail::subtract_past_mean(sample.y())
                                                  : Series<Scalar>(sample.y().tail(n - 1));
  return RegressionSample<Scalar>(std::move(y), std::move(x));
}

template <typename Scalar>
RegressionSample<Scalar> demean(const RegressionSample<Scalar>& sample, Demeaning mode) {
  return recursive_demean(sample, mode);
}

// ---------------------------------------------------------------------------
// Kernel and bandwidth specifications

enum class KernelFamily { OneSidedEpanechnikov, OneSidedQuartic, OneSidedUniform };

std::string_view to_string(KernelFamily family);
std::optional<KernelFamily> parse_kernel_family(std::string_view name);

/// One-sided kernel on [0, 1] together with its Lipschitz bound K̄.
/// The uniform family is discontinuous at 0 and 1, so it carries an infinite
/// bound and is rejected unless explicitly allowed.
struct KernelSpec {
  KernelFamily family = KernelFamily::OneSidedEpanechnikov;
  double lipschitz_bound = 6.0;

  static KernelSpec make(KernelFamily family, bool allow_non_lipschitz = false);
  static KernelSpec epanechnikov() { return make(KernelFamily::OneSidedEpanechnikov); }
  static KernelSpec quartic() { return make(KernelFamily::OneSidedQuartic); }
  static KernelSpec uniform() { return make(KernelFamily::OneSidedUniform, true); }

  bool is_lipschitz() const noexcept { return std::isfinite(lipschitz_bound); }
};

class BandwidthSpec {
 public:
  enum class Mode { Explicit, RateRule };

  static BandwidthSpec explicit_h(double h);
  /// h = c * T^-alpha; alpha in (0, 1). Rates outside (0, 1/2) resolve but are
  /// flagged by `admissible()`.
  static BandwidthSpec rate(double c, double alpha);
  static BandwidthSpec default_rule() { return rate(kDefaultConstant, kDefaultExponent); }

  static constexpr double kDefaultConstant = 2.0;
  static constexpr double kDefaultExponent = 1.0 / 3.0;

  Mode mode() const noexcept { return mode_; }
  double constant() const noexcept { return c_; }
  double exponent() const noexcept { return alpha_; }

  /// Resolves h for a sample of size T; throws InvalidBandwidth unless
  /// 0 < h < 1 and h*T >= 2.
  double resolve(Eigen::Index T) const;
  bool admissible() const noexcept { return mode_ == Mode::Explicit || (alpha_ > 0.0 && alpha_ < 0.5); }
  std::string describe() const;

 private:
  BandwidthSpec(Mode mode, double c, double alpha) : mode_(mode), c_(c), alpha_(alpha) {}
  Mode mode_;
  double c_;
  double alpha_;
};

// ---------------------------------------------------------------------------

enum class VolatilityKind { Estimated, TrueSimulated };

/// Volatility evaluated on r_t = (t-1)/T, t = 1..T. Always strictly positive.
template <typename Scalar = double>
class VolatilityPath {
 public:
  VolatilityPath(Series<Scalar> values, VolatilityKind kind) : values_(std::move(values)), kind_(kind) {
    if (!values_.allFinite() || (values_.size() > 0 && values_.minCoeff() <= Scalar(0))) {
      throw Error(ErrorCode::ZeroVolatility, "volatility path must be strictly positive and finite");
    }
  }

  const Series<Scalar>& values() const noexcept { return values_; }
  VolatilityKind kind() const noexcept { return kind_; }
  Eigen::Index size() const noexcept { return values_.size(); }
  Scalar operator[](Eigen::Index i) const { return values_[i]; }

 private:
  Series<Scalar> values_;
  VolatilityKind kind_;
};

enum class Method { TauSigmaHat, TauOracle, TauNonlinearIV, OlsT };

std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view name);

enum class Alternative { TwoSided, Greater };

std::string_view to_string(Alternative alt);

inline const std::vector<double>& default_levels() {
  static const std::vector<double> levels{0.01, 0.05, 0.10};
  return levels;
}

struct TestOutcome {
  double statistic = 0.0;
  double p_value = 1.0;
  Method method = Method::TauSigmaHat;
  Alternative alternative = Alternative::TwoSided;
  std::map<double, bool> rejected_at;
  std::optional<std::vector<double>> volatility_path;
  std::map<std::string, double> values;
  std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// Deterministic seeding

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Master seed plus a splittable derivation: every (replication, cell) pair
/// maps to its own substream seed, independent of scheduling.
struct Seed {
  std::uint64_t master = 0;

  constexpr std::uint64_t substream(std::uint64_t replication, std::uint64_t cell = 0) const noexcept {
    return mix64(mix64(mix64(master) ^ cell) ^ (replication * 0xd1b54a32d192ed03ULL));
  }

  Rng rng(std::uint64_t replication, std::uint64_t cell = 0) const { return Rng(substream(replication, cell)); }
};

}  // namespace predrobust
