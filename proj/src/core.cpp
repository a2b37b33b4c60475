#include "predrobust/core.hpp"

#include <sstream>

namespace predrobust {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DegenerateRegressor: return "DegenerateRegressor";
    case ErrorCode::DegenerateInstrument: return "DegenerateInstrument";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::ZeroVolatility: return "ZeroVolatility";
    case ErrorCode::DegenerateVolatility: return "DegenerateVolatility";
    case ErrorCode::InsufficientNullDraws: return "InsufficientNullDraws";
    case ErrorCode::InvalidKernel: return "InvalidKernel";
    case ErrorCode::InvalidBandwidth: return "InvalidBandwidth";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::VolatilityUnderflow: return "VolatilityUnderflow";
    case ErrorCode::TooManyFailures: return "TooManyFailures";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

std::string_view to_string(Demeaning d) {
  switch (d) {
    case Demeaning::None: return "none";
    case Demeaning::Recursive: return "recursive";
    case Demeaning::RecursivePredictor: return "predictor";
    case Demeaning::FullSample: return "full";
  }
  return "none";
}

std::optional<Demeaning> parse_demeaning(std::string_view name) {
  if (name == "none") return Demeaning::None;
  if (name == "recursive") return Demeaning::Recursive;
  if (name == "predictor") return Demeaning::RecursivePredictor;
  if (name == "full") return Demeaning::FullSample;
  return std::nullopt;
}

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::OneSidedEpanechnikov: return "epanechnikov";
    case KernelFamily::OneSidedQuartic: return "quartic";
    case KernelFamily::OneSidedUniform: return "uniform";
  }
  return "epanechnikov";
}

std::optional<KernelFamily> parse_kernel_family(std::string_view name) {
  if (name == "epanechnikov") return KernelFamily::OneSidedEpanechnikov;
  if (name == "quartic") return KernelFamily::OneSidedQuartic;
  if (name == "uniform") return KernelFamily::OneSidedUniform;
  return std::nullopt;
}

KernelSpec KernelSpec::make(KernelFamily family, bool allow_non_lipschitz) {
  switch (family) {
    // 6s(1-s): |K'| <= 6, sup K = 1.5
    case KernelFamily::OneSidedEpanechnikov: return {family, 6.0};
    // 30 s^2 (1-s)^2: |K'| <= 5.78, sup K = 1.875
    case KernelFamily::OneSidedQuartic: return {family, 6.0};
    case KernelFamily::OneSidedUniform:
      if (!allow_non_lipschitz) {
        throw Error(ErrorCode::InvalidKernel,
                    "the uniform kernel is discontinuous at 0 and 1 (not Lipschitz); "
                    "pass the explicit override to use it");
      }
      return {family, std::numeric_limits<double>::infinity()};
  }
  throw Error(ErrorCode::InvalidKernel, "unknown kernel family");
}

BandwidthSpec BandwidthSpec::explicit_h(double h) {
  if (!(h > 0.0 && h < 1.0)) {
    throw Error(ErrorCode::InvalidBandwidth, "bandwidth must lie in (0, 1), got " + std::to_string(h));
  }
  return BandwidthSpec(Mode::Explicit, h, 0.0);
}

BandwidthSpec BandwidthSpec::rate(double c, double alpha) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw Error(ErrorCode::InvalidBandwidth, "rate constant must be positive, got " + std::to_string(c));
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::InvalidBandwidth, "rate exponent must lie in (0, 1), got " + std::to_string(alpha));
  }
  return BandwidthSpec(Mode::RateRule, c, alpha);
}

double BandwidthSpec::resolve(Eigen::Index T) const {
  const double n = static_cast<double>(T);
  const double h = mode_ == Mode::Explicit ? c_ : c_ * std::pow(n, -alpha_);
  if (!(h > 0.0 && h < 1.0)) {
    throw Error(ErrorCode::InvalidBandwidth,
                "resolved bandwidth " + std::to_string(h) + " is outside (0, 1) for T=" + std::to_string(T));
  }
  if (h * n < 2.0) {
    throw Error(ErrorCode::InvalidBandwidth, "h*T = " + std::to_string(h * n) +
                                                 " < 2: every window needs at least two observations");
  }
  return h;
}

std::string BandwidthSpec::describe() const {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  if (mode_ == Mode::Explicit) {
    os << "explicit h=" << c_;
  } else {
    os << "rate h=" << c_ << "*T^-" << alpha_;
  }
  return os.str();
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::TauSigmaHat: return "tau_sigma_hat";
    case Method::TauOracle: return "tau_oracle";
    case Method::TauNonlinearIV: return "tau_nonlinear_iv";
    case Method::OlsT: return "ols_t";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "tau" || name == "tau_sigma_hat") return Method::TauSigmaHat;
  if (name == "oracle" || name == "tau_oracle") return Method::TauOracle;
  if (name == "nliv" || name == "tau_nonlinear_iv") return Method::TauNonlinearIV;
  if (name == "ols" || name == "ols_t") return Method::OlsT;
  return std::nullopt;
}

std::string_view to_string(Alternative alt) {
  return alt == Alternative::TwoSided ? "two-sided" : "greater";
}

}  // namespace predrobust
