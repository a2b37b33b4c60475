#include "predrobust/montecarlo.hpp"

#include "predrobust/inference.hpp"
#include "predrobust/io.hpp"
#include "predrobust/reference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace predrobust {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidConfig, what);
}

std::int64_t column_key(const DgpConfig& dgp) {
  if (const auto* c = std::get_if<ContinuousDgpConfig>(&dgp)) return c->years;
  return static_cast<std::int64_t>(std::get<DiscreteDgpConfig>(dgp).T);
}

double kappa_of(const DgpConfig& dgp) {
  return std::visit([](const auto& c) { return c.kappa_bar; }, dgp);
}

bool needs_tau_sample(const McConfig& c) {
  return std::any_of(c.methods.begin(), c.methods.end(), [](const MethodSpec& m) { return m.method != Method::OlsT; });
}

bool needs_ols_sample(const McConfig& c) {
  return std::any_of(c.methods.begin(), c.methods.end(), [](const MethodSpec& m) { return m.method == Method::OlsT; });
}

// Evaluates every configured method on one simulated dataset. Library errors
// mark only the affected method as failed.
void evaluate(const McConfig& config, const SimulatedDataset& data, double* out) {
  std::optional<RegressionSample<double>> tau_sample;
  std::optional<RegressionSample<double>> ols_sample;
  const std::span<const double> no_levels;
  try {
    if (needs_tau_sample(config)) tau_sample = demean(data.sample, config.demeaning);
  } catch (const Error&) {
  }
  try {
    if (needs_ols_sample(config)) ols_sample = demean(data.sample, config.ols_demeaning);
  } catch (const Error&) {
  }
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    const MethodSpec& spec = config.methods[m];
    double stat = std::numeric_limits<double>::quiet_NaN();
    try {
      switch (spec.method) {
        case Method::TauSigmaHat:
          if (tau_sample) {
            const double h = config.bandwidth.resolve(tau_sample->size());
            stat = tau_sigma_hat(*tau_sample, config.kernel, h, no_levels).statistic;
          }
          break;
        case Method::TauOracle:
          if (tau_sample) {
            const Series<double>& v = data.true_vol_y.values();
            const Series<double> aligned = v.tail(tau_sample->size());
            stat = tau_oracle(*tau_sample, aligned, no_levels).statistic;
          }
          break;
        case Method::TauNonlinearIV:
          if (tau_sample) stat = tau_nonlinear(*tau_sample, config.gamma, no_levels).statistic;
          break;
        case Method::OlsT:
          if (ols_sample) stat = ols_t_stat(*ols_sample, spec.alternative, no_levels).statistic;
          break;
      }
    } catch (const Error&) {
      stat = std::numeric_limits<double>::quiet_NaN();
    }
    out[m] = stat;
  }
}

// Runs body(rep) for rep in [0, n) on `workers` threads. Each index is handled
// exactly once; the first exception is rethrown after all threads join.
template <typename Body>
void parallel_for(std::size_t n, std::size_t workers, Body&& body) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  constexpr std::size_t kChunk = 16;
  auto run = [&] {
    while (!stop.load(std::memory_order_relaxed)) {
      const std::size_t begin = next.fetch_add(kChunk, std::memory_order_relaxed);
      if (begin >= n) return;
      const std::size_t end = std::min(n, begin + kChunk);
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        stop = true;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

void check_failures(const McConfig& config, const ReplicationDraws& draws) {
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    const double frac = static_cast<double>(draws.failures[m]) / static_cast<double>(config.reps);
    if (frac > config.max_failure_fraction) {
      throw Error(ErrorCode::TooManyFailures,
                  std::to_string(draws.failures[m]) + " of " + std::to_string(config.reps) + " replications failed for " +
                      config.methods[m].label() + " under " + config.label());
    }
  }
}

std::vector<double> finite_values(const std::vector<double>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (double s : v) {
    if (!std::isnan(s)) out.push_back(s);
  }
  return out;
}

std::string fmt(double v, int digits) { return format_fixed(v, digits); }

std::string fmt_general(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << v;
  return os.str();
}

std::string deviation_label(const MethodSpec& m) {
  switch (m.method) {
    case Method::OlsT: return "OLS";
    case Method::TauSigmaHat: return "tau";
    case Method::TauOracle: return "tau-oracle";
    case Method::TauNonlinearIV: return "tau-nliv";
  }
  return "unknown";
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string MethodSpec::label() const {
  std::string s(to_string(method));
  if (alternative == Alternative::Greater) s += "_greater";
  return s;
}

GammaTransform<double> default_gamma() {
  return GammaTransform<double>::custom([](double x) { return x * std::exp(-0.5 * x * x); });
}

void McConfig::validate() const {
  require(reps >= kMinReps, "reps must be at least " + std::to_string(kMinReps) + ", got " + std::to_string(reps));
  require(!methods.empty(), "at least one method is required");
  require(!levels.empty(), "at least one level is required");
  for (double level : levels) require(level > 0.0 && level < 1.0, "levels must lie in (0, 1)");
  require(workers >= 1, "workers must be positive");
  require(max_failure_fraction >= 0.0 && max_failure_fraction < 1.0, "failure fraction must lie in [0, 1)");
  std::visit([](const auto& c) { c.validate(); }, dgp);
}

std::string McConfig::label() const { return model_label.empty() ? describe(dgp) : model_label; }

ReplicationDraws simulate_statistics(const McConfig& config) {
  config.validate();
  const std::size_t n_methods = config.methods.size();
  // Row-major per replication so each worker writes a contiguous block.
  std::vector<double> flat(config.reps * n_methods, std::numeric_limits<double>::quiet_NaN());
  const Seed seed{config.master_seed};
  parallel_for(config.reps, config.workers, [&](std::size_t rep) {
    double* out = flat.data() + rep * n_methods;
    try {
      const SimulatedDataset data = simulate(config.dgp, seed.substream(rep, config.cell));
      evaluate(config, data, out);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InvalidConfig) throw;
    }
  });
  ReplicationDraws draws;
  draws.stats.assign(n_methods, std::vector<double>(config.reps));
  draws.failures.assign(n_methods, 0);
  for (std::size_t rep = 0; rep < config.reps; ++rep) {
    for (std::size_t m = 0; m < n_methods; ++m) {
      const double s = flat[rep * n_methods + m];
      draws.stats[m][rep] = s;
      if (std::isnan(s)) ++draws.failures[m];
    }
  }
  return draws;
}

const SizeCell* SizeTable::find(const std::string& model, Method method, double kappa, std::int64_t T,
                                double level) const {
  for (const auto& c : cells) {
    if (c.model == model && c.method.method == method && c.kappa == kappa && c.T == T &&
        std::abs(c.level - level) < 1e-12) {
      return &c;
    }
  }
  return nullptr;
}

void SizeTable::append(const SizeTable& other) { cells.insert(cells.end(), other.cells.begin(), other.cells.end()); }

SizeTable run_size(const McConfig& config) {
  const McConfig null_config = [&] {
    McConfig c = config;
    c.dgp = with_beta_bar(c.dgp, 0.0);
    return c;
  }();
  const ReplicationDraws draws = simulate_statistics(null_config);
  check_failures(null_config, draws);
  SizeTable table;
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    const MethodSpec& spec = config.methods[m];
    const std::size_t ok = config.reps - draws.failures[m];
    for (double level : config.levels) {
      const double cv = normal_critical_value(level, spec.alternative);
      std::size_t hits = 0;
      for (double s : draws.stats[m]) {
        if (!std::isnan(s) && rejects(s, cv, spec.alternative)) ++hits;
      }
      const double p = ok > 0 ? static_cast<double>(hits) / static_cast<double>(ok) : 0.0;
      SizeCell cell;
      cell.model = config.label();
      cell.method = spec;
      cell.kappa = kappa_of(config.dgp);
      cell.T = column_key(config.dgp);
      cell.level = level;
      cell.reject_pct = 100.0 * p;
      cell.mc_se = ok > 0 ? 100.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(ok)) : 0.0;
      cell.reps = ok;
      cell.failures = draws.failures[m];
      cell.seed = config.master_seed;
      table.cells.push_back(std::move(cell));
    }
  }
  return table;
}

std::vector<double> default_beta_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(2.0 * i);
  return grid;
}

PowerCurve run_power(const McConfig& config, const std::vector<double>& beta_grid) {
  require(std::find(beta_grid.begin(), beta_grid.end(), 0.0) != beta_grid.end(), "power grid must include 0");
  McConfig null_config = config;
  null_config.dgp = with_beta_bar(config.dgp, 0.0);
  const ReplicationDraws null_draws = simulate_statistics(null_config);
  check_failures(null_config, null_draws);

  const double level = config.levels.front();
  PowerCurve curve;
  curve.model = config.label();
  curve.kappa = kappa_of(config.dgp);
  curve.T = column_key(config.dgp);
  curve.level = level;
  curve.beta_grid = beta_grid;
  curve.reps = config.reps;
  curve.seed = config.master_seed;
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    PowerSeries s;
    s.method = config.methods[m];
    const std::vector<double> finite = finite_values(null_draws.stats[m]);
    s.critical_value = size_adjusted_cv(finite, level, s.method.alternative);
    curve.series.push_back(std::move(s));
  }
  for (const double beta_bar : beta_grid) {
    ReplicationDraws draws;
    if (beta_bar == 0.0) {
      draws = null_draws;
    } else {
      McConfig alt = config;
      alt.dgp = with_beta_bar(config.dgp, beta_bar);
      draws = simulate_statistics(alt);
      check_failures(alt, draws);
    }
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      PowerSeries& s = curve.series[m];
      std::size_t hits = 0;
      std::size_t ok = 0;
      for (double stat : draws.stats[m]) {
        if (std::isnan(stat)) continue;
        ++ok;
        if (rejects(stat, s.critical_value, s.method.alternative)) ++hits;
      }
      const double p = ok > 0 ? static_cast<double>(hits) / static_cast<double>(ok) : 0.0;
      s.reject_rate.push_back(p);
      s.mc_se.push_back(ok > 0 ? std::sqrt(p * (1.0 - p) / static_cast<double>(ok)) : 0.0);
    }
  }
  return curve;
}

// Reference tables ------------------------------------------------------------

std::string_view to_string(ReferenceTable table) { return table == ReferenceTable::Table1 ? "table1" : "table2"; }

std::vector<std::string> table_models(ReferenceTable table) {
  if (table == ReferenceTable::Table1) return {"CNST", "SB", "RS", "GBM"};
  return {"CNST", "SB", "ARCH-0.5773", "ARCH-0.7325", "IGARCH-0.9-0.1", "IGARCH-0.1-0.9"};
}

std::vector<double> table_kappas() { return {0.0, 5.0, 20.0}; }

std::vector<std::int64_t> table_columns(ReferenceTable table) {
  if (table == ReferenceTable::Table1) return {5, 20, 50};
  return {60, 240, 600};
}

DgpConfig table_dgp(ReferenceTable table, const std::string& model, double kappa, std::int64_t column,
                    const ReproduceOptions& options) {
  if (table == ReferenceTable::Table2) {
    DiscreteDgpConfig c;
    c.T = static_cast<Eigen::Index>(column);
    c.kappa_bar = kappa;
    if (model == "CNST") {
      c.vol = ConstantVol{};
    } else if (model == "SB") {
      c.vol = StructuralBreakVol{};
    } else if (model == "ARCH-0.5773") {
      c.vol = GarchVol{0.5773, 0.0, false};
    } else if (model == "ARCH-0.7325") {
      c.vol = GarchVol{0.7325, 0.0, false};
    } else if (model == "IGARCH-0.9-0.1") {
      // The reference IGARCH rows are labelled (persistence, shock); the
      // OLS column of the table only matches with the coefficients in this order.
      c.vol = GarchVol{0.1, 0.9, false};
    } else if (model == "IGARCH-0.1-0.9") {
      c.vol = GarchVol{0.9, 0.1, false};
    } else {
      throw Error(ErrorCode::InvalidConfig, "unknown discrete table model '" + model + "'");
    }
    return c;
  }
  ContinuousDgpConfig c;
  c.years = static_cast<int>(column);
  c.kappa_bar = kappa;
  c.sampling = options.sampling;
  if (model == "CNST") {
    c.vol = ConstantVol{};
  } else if (model == "SB") {
    c.vol = StructuralBreakVol{};
  } else if (model == "RS") {
    c.vol = RegimeSwitchingVol{};
  } else if (model == "GBM") {
    c.vol = GbmVol{};
  } else if (model == "GBM-w2") {
    GbmVol g;
    g.diffusion = GbmDiffusion::OmegaSquaredOverRootT;
    c.vol = g;
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown continuous table model '" + model + "'");
  }
  return c;
}

std::uint64_t table_cell_index(ReferenceTable table, const std::string& model, double kappa, std::int64_t column) {
  std::uint64_t h = mix64(table == ReferenceTable::Table1 ? 1 : 2);
  h = mix64(h ^ fnv1a(model));
  h = mix64(h ^ static_cast<std::uint64_t>(std::llround(kappa * 1000.0)));
  return mix64(h ^ static_cast<std::uint64_t>(column));
}

std::optional<double> Deviation::abs_deviation() const {
  if (!reference || !ours) return std::nullopt;
  return std::abs(*reference - *ours);
}

Reproduction reproduce_table(ReferenceTable table, const ReproduceOptions& options) {
  std::vector<std::string> models = table_models(table);
  if (table == ReferenceTable::Table1) {
    // Replace the single GBM row by the requested diffusion variants.
    models.erase(std::remove(models.begin(), models.end(), "GBM"), models.end());
    for (GbmDiffusion d : options.gbm_variants) {
      models.push_back(d == GbmDiffusion::OmegaOverRootT ? "GBM" : "GBM-w2");
    }
  }
  if (!options.models.empty()) {
    std::vector<std::string> kept;
    for (const auto& m : models) {
      if (std::find(options.models.begin(), options.models.end(), m) != options.models.end()) kept.push_back(m);
    }
    for (const auto& want : options.models) {
      require(std::find(models.begin(), models.end(), want) != models.end(),
              "model '" + want + "' is not part of " + std::string(to_string(table)));
    }
    models = std::move(kept);
  }

  std::vector<MethodSpec> methods{{Method::OlsT, Alternative::Greater}, {Method::TauSigmaHat, Alternative::TwoSided}};
  if (options.include_oracle) methods.push_back({Method::TauOracle, Alternative::TwoSided});

  Reproduction rep;
  rep.table = table;
  rep.reps = options.reps;
  rep.master_seed = options.master_seed;
  for (const auto& model : models) {
    const std::string ref_model = model == "GBM-w2" ? "GBM" : model;
    for (const double kappa : table_kappas()) {
      for (const std::int64_t column : table_columns(table)) {
        McConfig c;
        c.dgp = table_dgp(table, model, kappa, column, options);
        c.reps = options.reps;
        c.methods = methods;
        c.levels = {0.05};
        c.kernel = options.kernel;
        c.bandwidth = options.bandwidth;
        c.demeaning = options.demeaning;
        c.master_seed = options.master_seed;
        c.cell = table_cell_index(table, model, kappa, column);
        c.workers = options.workers;
        c.model_label = model;
        SizeTable cells;
        try {
          cells = run_size(c);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::TooManyFailures) throw;
          for (const auto& m : methods) {
            Deviation d;
            d.model = model;
            d.method = deviation_label(m);
            d.kappa = kappa;
            d.T = column;
            d.reference = reference_value(table, ref_model, d.method, kappa, column);
            d.error = e.what();
            rep.deviations.push_back(std::move(d));
          }
        }
        rep.size.append(cells);
        for (const auto& cell : cells.cells) {
          Deviation d;
          d.model = model;
          d.method = deviation_label(cell.method);
          d.kappa = kappa;
          d.T = column;
          d.reference = reference_value(table, ref_model, d.method, kappa, column);
          d.ours = cell.reject_pct;
          d.mc_se = cell.mc_se;
          rep.deviations.push_back(std::move(d));
        }
        for (const std::string_view other : reference_methods()) {
          if (other == "OLS" || other == "tau") continue;
          const auto reference = reference_value(table, ref_model, other, kappa, column);
          if (!reference) continue;
          Deviation d;
          d.model = model;
          d.method = std::string(other);
          d.kappa = kappa;
          d.T = column;
          d.reference = reference;
          d.implemented = false;
          rep.deviations.push_back(std::move(d));
        }
      }
    }
  }
  return rep;
}

// Writers ---------------------------------------------------------------------

void write_size_csv(std::ostream& os, const SizeTable& table) {
  std::ostringstream buf;
  buf.imbue(std::locale::classic());
  buf << "model,method,kappa,T,level,reject_pct,mc_se,reps,seed\n";
  for (const auto& c : table.cells) {
    buf << c.model << ',' << c.method.label() << ',' << fmt_general(c.kappa) << ',' << c.T << ','
        << fmt(c.level, 4) << ',' << fmt(c.reject_pct, 4) << ',' << fmt(c.mc_se, 4) << ',' << c.reps << ','
        << c.seed << '\n';
  }
  os << buf.str();
  if (!os) throw Error(ErrorCode::IoError, "failed writing size CSV");
}

void write_power_csv(std::ostream& os, const PowerCurve& curve) {
  std::ostringstream buf;
  buf.imbue(std::locale::classic());
  buf << "model,method,kappa,T,level,beta_bar,reject_rate,mc_se,critical_value,reps,seed\n";
  for (const auto& s : curve.series) {
    for (std::size_t i = 0; i < curve.beta_grid.size(); ++i) {
      buf << curve.model << ',' << s.method.label() << ',' << fmt_general(curve.kappa) << ',' << curve.T << ','
          << fmt(curve.level, 4) << ',' << fmt_general(curve.beta_grid[i]) << ',' << fmt(s.reject_rate[i], 4) << ','
          << fmt(s.mc_se[i], 4) << ',' << fmt(s.critical_value, 4) << ',' << curve.reps << ',' << curve.seed << '\n';
    }
  }
  os << buf.str();
  if (!os) throw Error(ErrorCode::IoError, "failed writing power CSV");
}

void write_power_svg(std::ostream& os, const PowerCurve& curve) {
  constexpr double kWidth = 640, kHeight = 420, kLeft = 60, kRight = 160, kTop = 40, kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double x_max = curve.beta_grid.empty() ? 1.0 : *std::max_element(curve.beta_grid.begin(), curve.beta_grid.end());
  const double x_min = curve.beta_grid.empty() ? 0.0 : *std::min_element(curve.beta_grid.begin(), curve.beta_grid.end());
  const double x_span = x_max > x_min ? x_max - x_min : 1.0;
  auto px = [&](double b) { return kLeft + (b - x_min) / x_span * plot_w; };
  auto py = [&](double r) { return kTop + (1.0 - r) * plot_h; };
  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  std::ostringstream buf;
  buf.imbue(std::locale::classic());
  buf << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  buf << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  buf << "<text x=\"" << kLeft << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">Size-adjusted power: "
      << curve.model << ", kappa=" << fmt_general(curve.kappa) << ", T=" << curve.T << "</text>\n";
  buf << "<g stroke=\"#999\" stroke-width=\"1\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double r = 0.25 * i;
    buf << "<line x1=\"" << kLeft << "\" y1=\"" << fmt(py(r), 2) << "\" x2=\"" << kLeft + plot_w << "\" y2=\""
        << fmt(py(r), 2) << "\" stroke-dasharray=\"2,3\"/>\n";
  }
  buf << "</g>\n";
  buf << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double r = 0.25 * i;
    buf << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(py(r) + 4, 2) << "\" text-anchor=\"end\">" << fmt(r, 2)
        << "</text>\n";
  }
  for (double b : curve.beta_grid) {
    buf << "<text x=\"" << fmt(px(b), 2) << "\" y=\"" << kTop + plot_h + 16 << "\" text-anchor=\"middle\">"
        << fmt_general(b) << "</text>\n";
  }
  buf << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\">beta_bar</text>\n";
  buf << "</g>\n";
  buf << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (std::size_t m = 0; m < curve.series.size(); ++m) {
    const auto& s = curve.series[m];
    const char* color = kColors[m % std::size(kColors)];
    buf << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < curve.beta_grid.size(); ++i) {
      if (i) buf << ' ';
      buf << fmt(px(curve.beta_grid[i]), 2) << ',' << fmt(py(s.reject_rate[i]), 2);
    }
    buf << "\"/>\n";
    const double ly = kTop + 16.0 + 18.0 * static_cast<double>(m);
    buf << "<line x1=\"" << kLeft + plot_w + 12 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + plot_w + 36 << "\" y2=\""
        << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    buf << "<text x=\"" << kLeft + plot_w + 42 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.method.label() << "</text>\n";
  }
  buf << "</svg>\n";
  os << buf.str();
  if (!os) throw Error(ErrorCode::IoError, "failed writing power SVG");
}

void write_deviation_csv(std::ostream& os, const Reproduction& rep) {
  std::ostringstream buf;
  buf.imbue(std::locale::classic());
  buf << "model,method,kappa,T,reference,ours,abs_dev,mc_se,status\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_fixed(*v, 4) : std::string(); };
  for (const auto& d : rep.deviations) {
    buf << d.model << ',' << d.method << ',' << fmt_general(d.kappa) << ',' << d.T << ',' << opt(d.reference) << ','
        << opt(d.ours) << ',' << opt(d.abs_deviation()) << ',' << opt(d.mc_se) << ','
        << (!d.implemented ? "not implemented" : !d.error.empty() ? "aborted" : d.reference ? "compared" : "no reference")
        << '\n';
  }
  os << buf.str();
  if (!os) throw Error(ErrorCode::IoError, "failed writing deviation CSV");
}

void write_markdown_report(std::ostream& os, const Reproduction& rep) {
  std::ostringstream buf;
  buf.imbue(std::locale::classic());
  const auto columns = table_columns(rep.table);
  const auto kappas = table_kappas();
  buf << "# Size reproduction: " << to_string(rep.table) << "\n\n";
  buf << "Replications per cell: " << rep.reps << ", master seed: " << rep.master_seed
      << ". Entries are 5% rejection percentages; each cell shows ours / reference (|difference|).\n\n";

  std::vector<std::string> methods;
  for (const auto& d : rep.deviations) {
    if (d.implemented && std::find(methods.begin(), methods.end(), d.method) == methods.end()) {
      methods.push_back(d.method);
    }
  }
  std::vector<std::string> models;
  for (const auto& d : rep.deviations) {
    if (std::find(models.begin(), models.end(), d.model) == models.end()) models.push_back(d.model);
  }
  auto lookup = [&](const std::string& model, const std::string& method, double kappa, std::int64_t col) {
    for (const auto& d : rep.deviations) {
      if (d.model == model && d.method == method && d.kappa == kappa && d.T == col) return &d;
    }
    return static_cast<const Deviation*>(nullptr);
  };

  for (const auto& method : methods) {
    buf << "## " << method << "\n\n| model |";
    for (double k : kappas) {
      for (auto col : columns) buf << " k=" << fmt_general(k) << " T=" << col << " |";
    }
    buf << "\n|---|";
    for (std::size_t i = 0; i < kappas.size() * columns.size(); ++i) buf << "---|";
    buf << '\n';
    for (const auto& model : models) {
      buf << "| " << model << " |";
      for (double k : kappas) {
        for (auto col : columns) {
          const Deviation* d = lookup(model, method, k, col);
          if (!d || !d->ours) {
            buf << " |";
            continue;
          }
          buf << ' ' << fmt(*d->ours, 1);
          if (d->reference) buf << " / " << fmt(*d->reference, 1) << " (" << fmt(*d->abs_deviation(), 1) << ")";
          buf << " |";
        }
      }
      buf << '\n';
    }
    buf << '\n';
  }

  buf << "## Summary\n\n";
  for (const auto& method : methods) {
    double worst = 0.0, sum = 0.0;
    std::size_t n = 0;
    std::string where;
    for (const auto& d : rep.deviations) {
      if (d.method != method) continue;
      const auto a = d.abs_deviation();
      if (!a) continue;
      sum += *a;
      ++n;
      if (*a > worst) {
        worst = *a;
        where = d.model + " k=" + fmt_general(d.kappa) + " T=" + std::to_string(d.T);
      }
    }
    if (n == 0) continue;
    buf << "- " << method << ": mean |difference| " << fmt(sum / static_cast<double>(n), 2) << "pp over " << n
        << " cells; largest " << fmt(worst, 2) << "pp at " << where << ".\n";
  }
  std::vector<std::string> missing;
  for (const auto& d : rep.deviations) {
    if (!d.implemented && std::find(missing.begin(), missing.end(), d.method) == missing.end()) {
      missing.push_back(d.method);
    }
  }
  if (!missing.empty()) {
    buf << "- Reference columns not implemented: ";
    for (std::size_t i = 0; i < missing.size(); ++i) buf << (i ? ", " : "") << missing[i];
    buf << ".\n";
  }
  for (const auto& d : rep.deviations) {
    if (d.error.empty()) continue;
    buf << "- Aborted: " << d.model << ' ' << d.method << " k=" << fmt_general(d.kappa) << " T=" << d.T << " ("
        << d.error << ").\n";
  }
  os << buf.str();
  if (!os) throw Error(ErrorCode::IoError, "failed writing markdown report");
}

}  // namespace predrobust
