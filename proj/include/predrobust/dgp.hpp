#pragma once

#include "predrobust/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>

namespace predrobust {

// Volatility models ----------------------------------------------------------

struct ConstantVol {};

/// σ_t = σ0 + (σ1 - σ0) 1{t/T >= break_frac}.
struct StructuralBreakVol {
  double sigma0 = 1.0;
  double sigma1 = 4.0;
  double break_frac = 0.8;
};

/// σ²_t = 1 + α e²_{t-1} + β σ²_{t-1}, with e the scaled shock σ_{t-1}ε_{t-1}
/// unless `raw_innovation` selects the standardized ε_{t-1}.
struct GarchVol {
  double alpha = 0.1;
  double beta = 0.9;
  bool raw_innovation = false;
};

enum class GbmDiffusion {
  /// ω̄/√T
  OmegaOverRootT,
  /// ω̄²/√T
  OmegaSquaredOverRootT,
};

/// dσ² = ½(ω̄²/T)σ² dt + c σ² dZ with corr(W1, Z) = rho_w1z.
struct GbmVol {
  double omega_bar = 9.0;
  double rho_w1z = -0.4;
  GbmDiffusion diffusion = GbmDiffusion::OmegaOverRootT;
  double floor = 1e-8;
};

/// Two-state chain with transition matrix over horizon τ
/// P_τ = Π + (I - Π) exp(-λ̄ τ / T), Π rows = (0.8, 0.2).
struct RegimeSwitchingVol {
  double lambda_bar = 60.0;
  double sigma0 = 1.0;
  double sigma1 = 4.0;
  double stay0_limit = 0.8;  // Π[·][0]
};

using DiscreteVolModel = std::variant<ConstantVol, StructuralBreakVol, GarchVol>;
using ContinuousVolModel = std::variant<ConstantVol, StructuralBreakVol, GbmVol, RegimeSwitchingVol>;

std::string describe(const DiscreteVolModel& m);
std::string describe(const ContinuousVolModel& m);

// Configurations -------------------------------------------------------------

inline constexpr int kBurnIn = 200;

/// y_t = (β̄/T) x_{t-1} + σ_{ε,t} ε_t,  x_t = (1 - κ̄/T) x_{t-1} + σ_{η,t} η_t.
struct DiscreteDgpConfig {
  Eigen::Index T = 240;
  double beta_bar = 0.0;
  double kappa_bar = 0.0;
  double rho_eps_eta = -0.98;
  DiscreteVolModel vol = ConstantVol{};

  void validate() const;
};

enum class Sampling { Daily, Monthly };

/// Euler discretization of dY = (β̄/T) X dt + σ dW1, dX = -(κ̄/T) X dt + σ dW2
/// over `years` years at step `delta`.
struct ContinuousDgpConfig {
  int years = 5;
  double delta = 1.0 / 252.0;
  double beta_bar = 0.0;
  double kappa_bar = 0.0;
  double rho_w1w2 = -0.98;
  ContinuousVolModel vol = ConstantVol{};
  Sampling sampling = Sampling::Monthly;
  int monthly_stride = 21;

  void validate() const;
  Eigen::Index steps() const;
  Eigen::Index observations() const;
};

using DgpConfig = std::variant<DiscreteDgpConfig, ContinuousDgpConfig>;

std::string describe(const DgpConfig& config);
Eigen::Index observations(const DgpConfig& config);
DgpConfig with_beta_bar(DgpConfig config, double beta_bar);

// Output ---------------------------------------------------------------------

struct SimulatedDataset {
  /// Pairs (y_t, x_{t-1}), t = 1..T, before any demeaning; x_0 = 0.
  RegressionSample<double> sample;
  /// Conditional standard deviation of each y_t.
  VolatilityPath<double> true_vol_y;
  /// Standardized regression errors: y_t - β x_{t-1} = true_vol_y[t] * true_eps[t].
  Series<double> true_eps;
  /// Contemporaneous predictor levels x_1..x_T.
  Series<double> x_level;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::string description;
  /// Times the GBM variance was reflected at its floor.
  std::int64_t floor_hits = 0;
};

/// (z1, z2) standard normals with correlation rho.
std::pair<double, double> correlated_pair(Rng& rng, double rho);

SimulatedDataset simulate_discrete(const DiscreteDgpConfig& config, std::uint64_t seed);
SimulatedDataset simulate_continuous(const ContinuousDgpConfig& config, std::uint64_t seed);
SimulatedDataset simulate(const DgpConfig& config, std::uint64_t seed);

/// Two-state chain transition probability P_τ[from][to].
double regime_transition(const RegimeSwitchingVol& rs, double horizon_years, double years, int from, int to);

/// Writes t,y,x,true_vol with rows t = 1..T holding contemporaneous (y_t, x_t).
void write_dataset_csv(std::ostream& os, const SimulatedDataset& data);

}  // namespace predrobust
