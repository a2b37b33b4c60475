#pragma once

#include "predrobust/core.hpp"
#include "predrobust/dgp.hpp"
#include "predrobust/estimators.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace predrobust {

struct MethodSpec {
  Method method = Method::TauSigmaHat;
  Alternative alternative = Alternative::TwoSided;

  std::string label() const;
};

/// γ(x) = x exp(-x²/2): bounded and integrable, the usual default instrument
/// for the nonlinear IV statistic.
GammaTransform<double> default_gamma();

struct McConfig {
  DgpConfig dgp = DiscreteDgpConfig{};
  std::size_t reps = 10000;
  std::vector<MethodSpec> methods{{Method::TauSigmaHat, Alternative::TwoSided}};
  std::vector<double> levels{0.05};
  KernelSpec kernel = KernelSpec::epanechnikov();
  BandwidthSpec bandwidth = BandwidthSpec::default_rule();
  /// Preprocessing for the τ family (τ(σ̂), oracle, nonlinear IV).
  Demeaning demeaning = Demeaning::RecursivePredictor;
  /// Preprocessing for the OLS t-test; full-sample demeaning equals a
  /// regression with intercept.
  Demeaning ols_demeaning = Demeaning::FullSample;
  GammaTransform<double> gamma = default_gamma();
  std::uint64_t master_seed = 1;
  /// Grid-cell index mixed into every substream seed.
  std::uint64_t cell = 0;
  std::size_t workers = 1;
  /// Row label used in tables ("CNST", "SB", ...). Empty means describe(dgp).
  std::string model_label;
  /// Abort when more than this fraction of replications fail for a method.
  double max_failure_fraction = 0.01;

  void validate() const;
  std::string label() const;
};

inline constexpr std::size_t kMinReps = 100;

/// Raw per-replication statistics: stats[m][r] for method m, replication r.
/// Failed replications hold NaN.
struct ReplicationDraws {
  std::vector<std::vector<double>> stats;
  std::vector<std::size_t> failures;
};

/// Simulates `config.reps` datasets at the configured β̄ and evaluates every
/// method on each. Replication r always uses substream (master_seed, cell, r),
/// so results do not depend on the worker count.
ReplicationDraws simulate_statistics(const McConfig& config);

struct SizeCell {
  std::string model;
  MethodSpec method;
  double kappa = 0.0;
  /// Table column key: sample size for discrete designs, years for continuous ones.
  std::int64_t T = 0;
  double level = 0.05;
  double reject_pct = 0.0;
  double mc_se = 0.0;
  std::size_t reps = 0;
  std::size_t failures = 0;
  std::uint64_t seed = 0;
};

struct SizeTable {
  std::vector<SizeCell> cells;

  const SizeCell* find(const std::string& model, Method method, double kappa, std::int64_t T,
                       double level = 0.05) const;
  void append(const SizeTable& other);
};

/// β̄ is forced to zero. Rejection uses normal critical values.
SizeTable run_size(const McConfig& config);

struct PowerSeries {
  MethodSpec method;
  double critical_value = 0.0;
  std::vector<double> reject_rate;
  std::vector<double> mc_se;
};

struct PowerCurve {
  std::string model;
  double kappa = 0.0;
  std::int64_t T = 0;
  double level = 0.05;
  std::vector<double> beta_grid;
  std::vector<PowerSeries> series;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
};

std::vector<double> default_beta_grid();

/// Size-adjusted power. The β̄ = 0 pass fixes each method's critical value as
/// the empirical null quantile; every grid point reuses the same substreams.
/// Only the first level in `config.levels` is used.
PowerCurve run_power(const McConfig& config, const std::vector<double>& beta_grid = default_beta_grid());

// Reproduction of the reference size tables ---------------------------------

enum class ReferenceTable { Table1, Table2 };

std::string_view to_string(ReferenceTable table);

struct ReproduceOptions {
  std::size_t reps = 10000;
  std::uint64_t master_seed = 1;
  std::size_t workers = 1;
  bool include_oracle = false;
  KernelSpec kernel = KernelSpec::epanechnikov();
  BandwidthSpec bandwidth = BandwidthSpec::default_rule();
  Demeaning demeaning = Demeaning::RecursivePredictor;
  Sampling sampling = Sampling::Monthly;
  /// When set, restricts the run to these row labels.
  std::vector<std::string> models;
  /// Continuous table only: which GBM diffusion variants to run. Each gets its
  /// own row ("GBM" and "GBM-w2").
  std::vector<GbmDiffusion> gbm_variants{GbmDiffusion::OmegaOverRootT};
};

struct Deviation {
  std::string model;
  std::string method;
  double kappa = 0.0;
  std::int64_t T = 0;
  std::optional<double> reference;
  std::optional<double> ours;
  std::optional<double> mc_se;
  bool implemented = true;
  /// Set when the cell's run aborted (for example too many degenerate draws).
  std::string error;

  std::optional<double> abs_deviation() const;
};

struct Reproduction {
  ReferenceTable table = ReferenceTable::Table2;
  SizeTable size;
  std::vector<Deviation> deviations;
  std::size_t reps = 0;
  std::uint64_t master_seed = 0;
};

/// Row labels of a reference table in table order.
std::vector<std::string> table_models(ReferenceTable table);
std::vector<double> table_kappas();
std::vector<std::int64_t> table_columns(ReferenceTable table);

/// Data-generating process behind one cell of a reference table.
DgpConfig table_dgp(ReferenceTable table, const std::string& model, double kappa, std::int64_t column,
                    const ReproduceOptions& options = {});

/// Stable grid-cell index so that adding or removing cells never perturbs others.
std::uint64_t table_cell_index(ReferenceTable table, const std::string& model, double kappa, std::int64_t column);

Reproduction reproduce_table(ReferenceTable table, const ReproduceOptions& options);

// Writers ---------------------------------------------------------------------

/// model,method,kappa,T,level,reject_pct,mc_se,reps,seed
void write_size_csv(std::ostream& os, const SizeTable& table);
/// model,method,kappa,T,level,beta_bar,reject_rate,mc_se,critical_value,reps,seed
void write_power_csv(std::ostream& os, const PowerCurve& curve);
void write_power_svg(std::ostream& os, const PowerCurve& curve);
/// model,method,kappa,T,reference,ours,abs_dev,mc_se,status
void write_deviation_csv(std::ostream& os, const Reproduction& rep);
void write_markdown_report(std::ostream& os, const Reproduction& rep);

}  // namespace predrobust
