#include "predrobust/dgp.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace predrobust {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string fmt_num(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << v;
  return os.str();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidConfig, what);
}

void validate_break(const StructuralBreakVol& sb) {
  require(sb.sigma0 > 0.0 && sb.sigma1 > 0.0, "structural-break volatilities must be positive");
  require(sb.break_frac > 0.0 && sb.break_frac < 1.0, "break fraction must lie in (0, 1)");
}

double garch_start(const GarchVol& g) { return g.alpha + g.beta < 1.0 ? 1.0 / (1.0 - g.alpha - g.beta) : 1.0; }

double garch_next(const GarchVol& g, double sigma2, double shock) {
  const double e = g.raw_innovation ? shock : std::sqrt(sigma2) * shock;
  return 1.0 + g.alpha * e * e + g.beta * sigma2;
}

}  // namespace

std::string describe(const DiscreteVolModel& m) {
  return std::visit(Overloaded{
                        [](const ConstantVol&) { return std::string("cnst"); },
                        [](const StructuralBreakVol& sb) {
                          return "sb(sigma0=" + fmt_num(sb.sigma0) + ",sigma1=" + fmt_num(sb.sigma1) +
                                 ",break=" + fmt_num(sb.break_frac) + ")";
                        },
                        [](const GarchVol& g) {
                          return "garch(alpha=" + fmt_num(g.alpha) + ",beta=" + fmt_num(g.beta) +
                                 (g.raw_innovation ? ",raw" : "") + ")";
                        },
                    },
                    m);
}

std::string describe(const ContinuousVolModel& m) {
  return std::visit(Overloaded{
                        [](const ConstantVol&) { return std::string("cnst"); },
                        [](const StructuralBreakVol& sb) {
                          return "sb(sigma0=" + fmt_num(sb.sigma0) + ",sigma1=" + fmt_num(sb.sigma1) +
                                 ",break=" + fmt_num(sb.break_frac) + ")";
                        },
                        [](const GbmVol& g) {
                          return "gbm(omega=" + fmt_num(g.omega_bar) + ",rho_w1z=" + fmt_num(g.rho_w1z) +
                                 (g.diffusion == GbmDiffusion::OmegaOverRootT ? ",diff=omega/sqrtT"
                                                                              : ",diff=omega^2/sqrtT") +
                                 ")";
                        },
                        [](const RegimeSwitchingVol& rs) {
                          return "rs(lambda=" + fmt_num(rs.lambda_bar) + ",sigma0=" + fmt_num(rs.sigma0) +
                                 ",sigma1=" + fmt_num(rs.sigma1) + ")";
                        },
                    },
                    m);
}

void DiscreteDgpConfig::validate() const {
  require(T >= 10, "T must be at least 10");
  require(std::isfinite(beta_bar) && std::isfinite(kappa_bar), "beta_bar and kappa_bar must be finite");
  require(kappa_bar >= 0.0, "kappa_bar must be non-negative");
  require(std::abs(rho_eps_eta) < 1.0, "innovation correlation must satisfy |rho| < 1");
  std::visit(Overloaded{
                 [](const ConstantVol&) {},
                 [](const StructuralBreakVol& sb) { validate_break(sb); },
                 [](const GarchVol& g) {
                   require(g.alpha >= 0.0 && g.beta >= 0.0, "GARCH coefficients must be non-negative");
                 },
             },
             vol);
}

Eigen::Index ContinuousDgpConfig::steps() const {
  return static_cast<Eigen::Index>(std::llround(static_cast<double>(years) / delta));
}

Eigen::Index ContinuousDgpConfig::observations() const {
  return sampling == Sampling::Monthly ? steps() / monthly_stride : steps();
}

void ContinuousDgpConfig::validate() const {
  require(years >= 1, "years must be positive");
  require(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
  const double n = static_cast<double>(years) / delta;
  require(std::abs(n - std::round(n)) < 1e-6, "years / delta must be an integer step count");
  require(std::isfinite(beta_bar) && std::isfinite(kappa_bar), "beta_bar and kappa_bar must be finite");
  require(kappa_bar >= 0.0, "kappa_bar must be non-negative");
  require(std::abs(rho_w1w2) < 1.0, "Brownian correlation must satisfy |rho| < 1");
  if (sampling == Sampling::Monthly) {
    require(monthly_stride >= 1 && steps() % monthly_stride == 0, "step count must be divisible by the stride");
  }
  require(observations() >= 10, "too few sampled observations");
  std::visit(Overloaded{
                 [](const ConstantVol&) {},
                 [](const StructuralBreakVol& sb) { validate_break(sb); },
                 [](const GbmVol& g) {
                   require(g.omega_bar >= 0.0, "omega_bar must be non-negative");
                   require(std::abs(g.rho_w1z) < 1.0, "GBM correlation must satisfy |rho| < 1");
                   require(g.floor > 0.0, "variance floor must be positive");
                 },
                 [](const RegimeSwitchingVol& rs) {
                   require(rs.lambda_bar > 0.0, "lambda_bar must be positive");
                   require(rs.sigma0 > 0.0 && rs.sigma1 > 0.0, "regime volatilities must be positive");
                   require(rs.stay0_limit > 0.0 && rs.stay0_limit < 1.0, "limit probability must lie in (0, 1)");
                 },
             },
             vol);
}

std::string describe(const DgpConfig& config) {
  return std::visit(Overloaded{
                        [](const DiscreteDgpConfig& c) {
                          return "discrete T=" + std::to_string(c.T) + " beta_bar=" + fmt_num(c.beta_bar) +
                                 " kappa_bar=" + fmt_num(c.kappa_bar) + " rho=" + fmt_num(c.rho_eps_eta) +
                                 " vol=" + describe(c.vol);
                        },
                        [](const ContinuousDgpConfig& c) {
                          return "continuous years=" + std::to_string(c.years) + " delta=" + fmt_num(c.delta) +
                                 " beta_bar=" + fmt_num(c.beta_bar) + " kappa_bar=" + fmt_num(c.kappa_bar) +
                                 " rho=" + fmt_num(c.rho_w1w2) + " vol=" + describe(c.vol) + " sampling=" +
                                 (c.sampling == Sampling::Monthly ? "monthly/" + std::to_string(c.monthly_stride)
                                                                  : std::string("daily"));
                        },
                    },
                    config);
}

Eigen::Index observations(const DgpConfig& config) {
  return std::visit(Overloaded{
                        [](const DiscreteDgpConfig& c) { return c.T; },
                        [](const ContinuousDgpConfig& c) { return c.observations(); },
                    },
                    config);
}

DgpConfig with_beta_bar(DgpConfig config, double beta_bar) {
  std::visit([beta_bar](auto& c) { c.beta_bar = beta_bar; }, config);
  return config;
}

std::pair<double, double> correlated_pair(Rng& rng, double rho) {
  std::normal_distribution<double> normal;
  const double z1 = normal(rng);
  const double w = normal(rng);
  return {z1, rho * z1 + std::sqrt(1.0 - rho * rho) * w};
}

SimulatedDataset simulate_discrete(const DiscreteDgpConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  std::normal_distribution<double> normal;
  const double rho = config.rho_eps_eta;
  const double rho_c = std::sqrt(1.0 - rho * rho);
  auto draw = [&] {
    const double e = normal(rng);
    return std::pair{e, rho * e + rho_c * normal(rng)};
  };

  const Eigen::Index T = config.T;
  const double Td = static_cast<double>(T);
  const double beta = config.beta_bar / Td;
  const double ar = 1.0 - config.kappa_bar / Td;

  const auto* garch = std::get_if<GarchVol>(&config.vol);
  const auto* sb = std::get_if<StructuralBreakVol>(&config.vol);
  double s2e = 1.0;
  double s2n = 1.0;
  if (garch) {
    s2e = s2n = garch_start(*garch);
    for (int k = 0; k < kBurnIn; ++k) {
      const auto [e, n] = draw();
      s2e = garch_next(*garch, s2e, e);
      s2n = garch_next(*garch, s2n, n);
    }
  }

  Series<double> y(T), x_lag(T), vol(T), eps(T), x_level(T);
  double x_prev = 0.0;
  for (Eigen::Index t = 1; t <= T; ++t) {
    double se = 1.0;
    double sn = 1.0;
    if (sb) {
      se = sn = static_cast<double>(t) / Td >= sb->break_frac ? sb->sigma1 : sb->sigma0;
    } else if (garch) {
      se = std::sqrt(s2e);
      sn = std::sqrt(s2n);
    }
    const auto [e, n] = draw();
    const double x_t = ar * x_prev + sn * n;
    const auto i = t - 1;
    y[i] = beta * x_prev + se * e;
    x_lag[i] = x_prev;
    vol[i] = se;
    eps[i] = e;
    x_level[i] = x_t;
    x_prev = x_t;
    if (garch) {
      s2e = garch_next(*garch, s2e, e);
      s2n = garch_next(*garch, s2n, n);
    }
  }
  if (!vol.allFinite() || !x_level.allFinite() || !y.allFinite()) {
    throw Error(ErrorCode::VolatilityUnderflow, "simulated path overflowed");
  }
  return SimulatedDataset{RegressionSample<double>(std::move(y), std::move(x_lag)),
                          VolatilityPath<double>(std::move(vol), VolatilityKind::TrueSimulated),
                          std::move(eps),
                          std::move(x_level),
                          beta,
                          seed,
                          describe(DgpConfig{config}),
                          0};
}

double regime_transition(const RegimeSwitchingVol& rs, double horizon_years, double years, int from, int to) {
  const double limit[2] = {rs.stay0_limit, 1.0 - rs.stay0_limit};
  const double decay = std::exp(-rs.lambda_bar * horizon_years / years);
  const double identity = from == to ? 1.0 : 0.0;
  return limit[to] + (identity - limit[to]) * decay;
}

SimulatedDataset simulate_continuous(const ContinuousDgpConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;

  const double years = static_cast<double>(config.years);
  const double dt = config.delta;
  const double sqdt = std::sqrt(dt);
  const double rho = config.rho_w1w2;
  const double rho_c = std::sqrt(1.0 - rho * rho);
  const double drift_y = config.beta_bar / years;
  const double drift_x = config.kappa_bar / years;
  const Eigen::Index stride = config.sampling == Sampling::Monthly ? config.monthly_stride : 1;
  const Eigen::Index M = config.observations();

  const auto* sb = std::get_if<StructuralBreakVol>(&config.vol);
  const auto* gbm = std::get_if<GbmVol>(&config.vol);
  const auto* rs = std::get_if<RegimeSwitchingVol>(&config.vol);

  double sigma2 = 1.0;
  double gbm_drift = 0.0;
  double gbm_diff = 0.0;
  double gbm_rho_c = 0.0;
  if (gbm) {
    gbm_drift = 0.5 * gbm->omega_bar * gbm->omega_bar / years;
    gbm_diff = (gbm->diffusion == GbmDiffusion::OmegaOverRootT ? gbm->omega_bar : gbm->omega_bar * gbm->omega_bar) /
               std::sqrt(years);
    gbm_rho_c = std::sqrt(1.0 - gbm->rho_w1z * gbm->rho_w1z);
  }
  int state = 0;
  double p_leave[2] = {0.0, 0.0};
  if (rs) {
    state = uniform(rng) < 1.0 - rs->stay0_limit ? 1 : 0;
    p_leave[0] = regime_transition(*rs, dt, years, 0, 1);
    p_leave[1] = regime_transition(*rs, dt, years, 1, 0);
  }

  Series<double> y(M), x_lag(M), vol(M), eps(M), x_level(M);
  double X = 0.0;
  std::int64_t floor_hits = 0;
  for (Eigen::Index m = 0; m < M; ++m) {
    const double x_start = X;
    double dy_sum = 0.0;
    double noise = 0.0;
    double var = 0.0;
    for (Eigen::Index j = 0; j < stride; ++j) {
      const double t = static_cast<double>(m * stride + j) * dt;
      double sigma = 1.0;
      if (sb) {
        sigma = t / years >= sb->break_frac ? sb->sigma1 : sb->sigma0;
      } else if (gbm) {
        sigma = std::sqrt(sigma2);
      } else if (rs) {
        sigma = state == 1 ? rs->sigma1 : rs->sigma0;
      }
      const double w1 = normal(rng);
      const double w2 = rho * w1 + rho_c * normal(rng);
      const double shock = sigma * sqdt * w1;
      dy_sum += drift_y * X * dt + shock;
      noise += shock;
      var += sigma * sigma * dt;
      X += -drift_x * X * dt + sigma * sqdt * w2;
      if (gbm) {
        const double z = gbm->rho_w1z * w1 + gbm_rho_c * normal(rng);
        sigma2 += gbm_drift * sigma2 * dt + gbm_diff * sigma2 * sqdt * z;
        if (sigma2 < gbm->floor) {
          sigma2 = 2.0 * gbm->floor - sigma2;
          ++floor_hits;
        }
        if (!std::isfinite(sigma2) || !(sigma2 > 0.0)) {
          throw Error(ErrorCode::VolatilityUnderflow, "GBM variance left the representable range");
        }
      } else if (rs) {
        if (uniform(rng) < p_leave[state]) state = 1 - state;
      }
    }
    const double sd = std::sqrt(var);
    y[m] = dy_sum;
    x_lag[m] = x_start;
    vol[m] = sd;
    eps[m] = noise / sd;
    x_level[m] = X;
  }
  if (!vol.allFinite() || !(vol.minCoeff() > 0.0) || !y.allFinite() || !x_level.allFinite()) {
    throw Error(ErrorCode::VolatilityUnderflow, "simulated path degenerated");
  }
  return SimulatedDataset{RegressionSample<double>(std::move(y), std::move(x_lag)),
                          VolatilityPath<double>(std::move(vol), VolatilityKind::TrueSimulated),
                          std::move(eps),
                          std::move(x_level),
                          drift_y * dt * static_cast<double>(stride),
                          seed,
                          describe(DgpConfig{config}),
                          floor_hits};
}

SimulatedDataset simulate(const DgpConfig& config, std::uint64_t seed) {
  return std::visit(Overloaded{
                        [seed](const DiscreteDgpConfig& c) { return simulate_discrete(c, seed); },
                        [seed](const ContinuousDgpConfig& c) { return simulate_continuous(c, seed); },
                    },
                    config);
}

void write_dataset_csv(std::ostream& os, const SimulatedDataset& data) {
  std::ostringstream buf;
  buf.imbue(std::locale::classic());
  buf << std::setprecision(std::numeric_limits<double>::max_digits10);
  buf << "t,y,x,true_vol\n";
  const auto& y = data.sample.y();
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    buf << (i + 1) << ',' << y[i] << ',' << data.x_level[i] << ',' << data.true_vol_y[i] << '\n';
  }
  os << buf.str();
  if (!os) throw Error(ErrorCode::IoError, "failed writing dataset CSV");
}

}  // namespace predrobust
