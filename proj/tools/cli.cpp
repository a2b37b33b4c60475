#include "cli.hpp"

#include "predrobust/dgp.hpp"
#include "predrobust/inference.hpp"
#include "predrobust/io.hpp"
#include "predrobust/montecarlo.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace predrobust::cli {

namespace {

namespace fs = std::filesystem;

/// Raised for flag combinations CLI11 cannot express; maps to exit code 64.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Kernel, bandwidth and demeaning flags shared by `test` and `reproduce`.
struct SmoothingFlags {
  std::string kernel = "epanechnikov";
  bool allow_non_lipschitz = false;
  double bandwidth = 0.0;
  std::vector<double> rate;
  std::string demean = "predictor";
  CLI::Option* bandwidth_opt = nullptr;

  void attach(CLI::App* app) {
    app->add_option("--kernel", kernel, "One-sided kernel family")
        ->check(CLI::IsMember({"epanechnikov", "quartic", "uniform"}))
        ->capture_default_str();
    app->add_flag("--allow-non-lipschitz", allow_non_lipschitz, "Permit the discontinuous uniform kernel");
    bandwidth_opt = app->add_option("--bandwidth", bandwidth, "Explicit bandwidth h in (0, 1)");
    auto* rate_opt = app->add_option("--bandwidth-rate", rate, "Rate rule h = c * T^-alpha, given as: c alpha")
                         ->expected(2)
                         ->type_name("C ALPHA");
    bandwidth_opt->excludes(rate_opt);
    app->add_option("--demean", demean,
                    "Preprocessing for the tau family: predictor (recursive, x only), recursive (x and y), "
                    "full (sample means) or none")
        ->check(CLI::IsMember({"none", "recursive", "predictor", "full"}))
        ->capture_default_str();
  }

  KernelSpec kernel_spec() const { return KernelSpec::make(*parse_kernel_family(kernel), allow_non_lipschitz); }

  BandwidthSpec bandwidth_spec() const {
    if (bandwidth_opt->count() > 0) return BandwidthSpec::explicit_h(bandwidth);
    if (rate.size() == 2) return BandwidthSpec::rate(rate[0], rate[1]);
    return BandwidthSpec::default_rule();
  }

  Demeaning demeaning() const { return *parse_demeaning(demean); }
};

std::uint64_t resolve_seed(const CLI::Option* opt, std::uint64_t value, std::ostream& out) {
  if (opt->count() > 0) return value;
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  out << "seed: " << seed << " (no --seed given; pass --seed " << seed << " to repeat this run)\n";
  return seed;
}

std::size_t resolve_workers(std::size_t from_flags) {
  if (const char* env = std::getenv("PREDROBUST_WORKERS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0' || v == 0) {
      throw UsageError("PREDROBUST_WORKERS must be a positive integer, got '" + std::string(env) + "'");
    }
    return static_cast<std::size_t>(v);
  }
  if (from_flags > 0) return from_flags;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const auto& n : names) {
    const auto m = parse_method(lower(n));
    if (!m) throw UsageError("unknown method '" + n + "' (expected tau, oracle, nliv or ols)");
    if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
  }
  return out;
}

Alternative parse_alternative(const std::string& s) {
  if (s == "greater") return Alternative::Greater;
  return Alternative::TwoSided;
}

std::string format_p(double p) {
  if (p > 0.0 && p < 1e-4) return "<0.0001";
  return format_fixed(p, 4);
}

void write_row(std::ostream& out, std::string_view key, const std::string& value) {
  out << std::left << std::setw(16) << key << value << '\n';
}

// ---------------------------------------------------------------------------
// test

struct TestFlags {
  std::string csv;
  SmoothingFlags smoothing;
  std::vector<std::string> methods{"tau"};
  std::string alternative = "two-sided";
  std::vector<double> levels{0.01, 0.05, 0.10};
  std::string diagnostics;
  bool gate = false;
  std::string gamma = "default";
};

void attach(CLI::App* app, TestFlags& f) {
  app->add_option("csv", f.csv, "CSV file with header columns y and x (true_vol optional)")
      ->required();
  f.smoothing.attach(app);
  app->add_option("--method", f.methods, "Statistics to compute: tau, oracle, nliv, ols")
      ->delimiter(',')
      ->capture_default_str();
  app->add_option("--alternative", f.alternative, "two-sided or greater (beta > 0)")
      ->check(CLI::IsMember({"two-sided", "greater"}))
      ->capture_default_str();
  app->add_option("--levels", f.levels, "Nominal levels in (0, 1)")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0).description("in (0, 1)"))
      ->capture_default_str();
  app->add_option("--diagnostics", f.diagnostics, "Write the estimated volatility path to this CSV file");
  app->add_flag("--gate", f.gate, "Exit with status 2 when the first method rejects at the primary level");
  app->add_option("--gamma", f.gamma, "Instrument for nliv: default (x exp(-x^2/2)), sign or identity")
      ->check(CLI::IsMember({"default", "sign", "identity"}))
      ->capture_default_str();
}

GammaTransform<double> gamma_from(const std::string& name) {
  if (name == "sign") return GammaTransform<double>::sign();
  if (name == "identity") return GammaTransform<double>::identity();
  return default_gamma();
}

int cmd_test(const TestFlags& f, std::ostream& out) {
  for (const double level : f.levels) {
    if (!(level > 0.0 && level < 1.0)) throw UsageError("levels must lie strictly between 0 and 1");
  }
  const auto methods = parse_methods(f.methods);
  const Alternative alt = parse_alternative(f.alternative);
  const KernelSpec kernel = f.smoothing.kernel_spec();
  const BandwidthSpec bandwidth = f.smoothing.bandwidth_spec();
  const Demeaning demeaning = f.smoothing.demeaning();

  const SeriesTable table = read_series_csv(fs::path(f.csv));
  const RegressionSample<double> raw = build_sample(table.y, table.x);
  const std::vector<double> levels = f.levels;
  const double primary = std::find(levels.begin(), levels.end(), 0.05) != levels.end() ? 0.05 : levels.front();

  bool gate_reject = false;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const Method method = methods[i];
    const Demeaning dm = method == Method::OlsT ? Demeaning::FullSample : demeaning;
    const RegressionSample<double> sample = demean(raw, dm);
    TestOutcome o;
    switch (method) {
      case Method::TauSigmaHat:
        o = tau_sigma_hat(sample, kernel, bandwidth, levels, !f.diagnostics.empty());
        break;
      case Method::TauOracle: {
        if (!table.true_vol) {
          throw Error(ErrorCode::InvalidConfig, "method 'oracle' needs a true_vol column in the CSV");
        }
        const Series<double> vol =
            Eigen::Map<const Series<double>>(table.true_vol->data(), static_cast<Eigen::Index>(table.true_vol->size()))
                .tail(sample.size());
        o = tau_oracle(sample, vol, levels);
        break;
      }
      case Method::TauNonlinearIV:
        o = tau_nonlinear(sample, gamma_from(f.gamma), levels);
        break;
      case Method::OlsT:
        o = ols_t_stat(sample, alt, levels);
        break;
    }
    if (o.alternative != alt) {
      o.alternative = alt;
      detail::finish_outcome(o, levels);
    }

    if (i > 0) out << '\n';
    write_row(out, "method", std::string(to_string(method)));
    write_row(out, "alternative", std::string(to_string(alt)));
    write_row(out, "observations", std::to_string(sample.size()));
    write_row(out, "demeaning", std::string(to_string(dm)));
    if (method == Method::TauSigmaHat) {
      write_row(out, "kernel", std::string(to_string(kernel.family)));
      write_row(out, "bandwidth", format_fixed(o.values.at("h"), 4) + " (" + bandwidth.describe() + ")");
    }
    for (const char* key : {"beta_ols", "beta_iv"}) {
      if (auto it = o.values.find(key); it != o.values.end()) write_row(out, key, format_fixed(it->second, 6));
    }
    write_row(out, "statistic", format_fixed(o.statistic, 4));
    write_row(out, "p_value", format_p(o.p_value));
    for (const auto& [level, rejected] : o.rejected_at) {
      write_row(out, "reject@" + format_fixed(level, 2), rejected ? "yes" : "no");
    }
    for (const auto& w : o.warnings) write_row(out, "warning", w);
    if (i == 0) gate_reject = o.rejected_at.at(primary);

    if (method == Method::TauSigmaHat && o.volatility_path) {
      std::ofstream diag(f.diagnostics);
      if (!diag) throw Error(ErrorCode::IoError, "cannot write diagnostics to '" + f.diagnostics + "'");
      diag << "t,r,sigma_hat\n";
      const auto& path = *o.volatility_path;
      const auto T = static_cast<double>(path.size());
      for (std::size_t t = 0; t < path.size(); ++t) {
        diag << t + 1 << ',' << format_fixed(static_cast<double>(t) / T, 6) << ',' << format_fixed(path[t], 6)
             << '\n';
      }
      write_row(out, "diagnostics", f.diagnostics);
    }
  }
  if (f.gate && gate_reject) return kExitRejected;
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateFlags {
  std::string model = "cnst";
  bool continuous = false;
  Eigen::Index T = 240;
  int years = 5;
  double beta_bar = 0.0;
  double kappa = 0.0;
  double rho = -0.98;
  double sigma0 = 1.0;
  double sigma1 = 4.0;
  double break_frac = 0.8;
  double alpha = 0.1;
  double garch_beta = 0.9;
  bool garch_raw_innovation = false;
  double omega = 9.0;
  double rho_vol = -0.4;
  std::string gbm_diffusion = "omega";
  double lambda = 60.0;
  std::string sampling = "monthly";
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  std::string out;
};

void attach(CLI::App* app, SimulateFlags& f) {
  app->add_option("--model", f.model, "Volatility model: cnst, sb, garch, gbm, rs")
      ->transform(CLI::IsMember({"cnst", "sb", "garch", "gbm", "rs"}, CLI::ignore_case))
      ->capture_default_str();
  app->add_flag("--continuous", f.continuous, "Continuous-time design (implied by gbm and rs)");
  app->add_option("--T", f.T, "Discrete sample size")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--years", f.years, "Continuous design length in years")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--beta-bar", f.beta_bar, "Local slope: beta = beta_bar / T")->capture_default_str();
  app->add_option("--kappa", f.kappa, "Local-to-unity parameter: rho = 1 - kappa / T")->capture_default_str();
  app->add_option("--rho", f.rho, "Correlation between return and predictor shocks")
      ->check(CLI::Range(-1.0, 1.0))
      ->capture_default_str();
  app->add_option("--sigma0", f.sigma0, "Volatility before the break / in regime 0")->capture_default_str();
  app->add_option("--sigma1", f.sigma1, "Volatility after the break / in regime 1")->capture_default_str();
  app->add_option("--break-frac", f.break_frac, "Break date as a fraction of the sample")->capture_default_str();
  app->add_option("--alpha", f.alpha, "GARCH coefficient on the lagged squared shock")->capture_default_str();
  app->add_option("--garch-beta", f.garch_beta, "GARCH coefficient on the lagged variance")->capture_default_str();
  app->add_flag("--garch-raw-innovation", f.garch_raw_innovation,
                "Feed the standardized innovation into the GARCH recursion");
  app->add_option("--omega", f.omega, "GBM volatility-of-volatility parameter")->capture_default_str();
  app->add_option("--rho-vol", f.rho_vol, "GBM leverage correlation")->capture_default_str();
  app->add_option("--gbm-diffusion", f.gbm_diffusion, "GBM diffusion coefficient: omega (w/sqrt T) or omega2")
      ->check(CLI::IsMember({"omega", "omega2"}))
      ->capture_default_str();
  app->add_option("--lambda", f.lambda, "Regime-switching intensity")->capture_default_str();
  app->add_option("--sampling", f.sampling, "Continuous sampling: monthly or daily")
      ->check(CLI::IsMember({"monthly", "daily"}))
      ->capture_default_str();
  f.seed_opt = app->add_option("--seed", f.seed, "Random seed");
  app->add_option("--out", f.out, "Output CSV path (t,y,x,true_vol)")->required();
}

DgpConfig dgp_from(const SimulateFlags& f) {
  const bool continuous = f.continuous || f.model == "gbm" || f.model == "rs";
  if (!continuous) {
    DiscreteDgpConfig c;
    c.T = f.T;
    c.beta_bar = f.beta_bar;
    c.kappa_bar = f.kappa;
    c.rho_eps_eta = f.rho;
    if (f.model == "sb") c.vol = StructuralBreakVol{f.sigma0, f.sigma1, f.break_frac};
    if (f.model == "garch") c.vol = GarchVol{f.alpha, f.garch_beta, f.garch_raw_innovation};
    return c;
  }
  ContinuousDgpConfig c;
  c.years = f.years;
  c.beta_bar = f.beta_bar;
  c.kappa_bar = f.kappa;
  c.rho_w1w2 = f.rho;
  c.sampling = f.sampling == "daily" ? Sampling::Daily : Sampling::Monthly;
  if (f.model == "sb") c.vol = StructuralBreakVol{f.sigma0, f.sigma1, f.break_frac};
  if (f.model == "garch") throw UsageError("model garch is discrete-time only");
  if (f.model == "gbm") {
    GbmVol g;
    g.omega_bar = f.omega;
    g.rho_w1z = f.rho_vol;
    g.diffusion = f.gbm_diffusion == "omega2" ? GbmDiffusion::OmegaSquaredOverRootT : GbmDiffusion::OmegaOverRootT;
    c.vol = g;
  }
  if (f.model == "rs") {
    RegimeSwitchingVol rs;
    rs.lambda_bar = f.lambda;
    rs.sigma0 = f.sigma0;
    rs.sigma1 = f.sigma1;
    c.vol = rs;
  }
  return c;
}

void print_smoke_check(const SimulateFlags& f, const SimulatedDataset& data, std::ostream& out) {
  const Series<double> u = data.sample.y() - data.beta * data.sample.x_lag();
  if (f.model == "sb") {
    const Eigen::Index T = u.size();
    double pre = 0.0, post = 0.0;
    Eigen::Index npre = 0, npost = 0;
    for (Eigen::Index t = 1; t <= T; ++t) {
      const double v = u[t - 1] * u[t - 1];
      if (static_cast<double>(t) / static_cast<double>(T) >= f.break_frac) {
        post += v;
        ++npost;
      } else {
        pre += v;
        ++npre;
      }
    }
    if (npre > 0 && npost > 0) {
      const double expected = (f.sigma1 * f.sigma1) / (f.sigma0 * f.sigma0);
      out << "smoke check: post/pre-break error variance ratio = "
          << format_fixed((post / static_cast<double>(npost)) / (pre / static_cast<double>(npre)), 2)
          << " (population " << format_fixed(expected, 2) << ")\n";
    }
    return;
  }
  const double sample_var = u.squaredNorm() / static_cast<double>(u.size());
  const double mean_vol_sq = data.true_vol_y.values().squaredNorm() / static_cast<double>(u.size());
  out << "smoke check: mean squared error = " << format_fixed(sample_var, 4)
      << ", mean true variance = " << format_fixed(mean_vol_sq, 4) << '\n';
}

int cmd_simulate(const SimulateFlags& f, std::ostream& out) {
  const DgpConfig config = dgp_from(f);
  std::visit([](const auto& c) { c.validate(); }, config);
  const std::uint64_t seed = resolve_seed(f.seed_opt, f.seed, out);
  const SimulatedDataset data = simulate(config, seed);
  {
    std::ofstream file(f.out, std::ios::binary);
    if (!file) throw Error(ErrorCode::IoError, "cannot write '" + f.out + "'");
    write_dataset_csv(file, data);
    if (!file) throw Error(ErrorCode::IoError, "failed while writing '" + f.out + "'");
  }
  out << "model: " << describe(config) << '\n';
  out << "rows: " << data.sample.size() << '\n';
  if (data.floor_hits > 0) out << "variance floor hits: " << data.floor_hits << '\n';
  print_smoke_check(f, data, out);
  out << "wrote " << f.out << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// reproduce

struct ReproduceFlags {
  int table = 0;
  CLI::Option* table_opt = nullptr;
  bool power = false;
  std::string model = "cnst";
  double kappa = 0.0;
  std::int64_t T = 600;
  bool continuous = false;
  std::size_t reps = 10000;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  std::string out_dir = "results";
  std::size_t workers = 0;
  bool oracle = false;
  std::vector<std::string> gbm_variants{"omega", "omega2"};
  std::vector<std::string> models;
  std::string sampling = "monthly";
  std::vector<std::string> methods{"tau", "ols"};
  SmoothingFlags smoothing;
};

void attach(CLI::App* app, ReproduceFlags& f) {
  f.table_opt = app->add_option("--table", f.table, "Size table to reproduce: 1 (continuous) or 2 (discrete)")
                    ->check(CLI::IsMember({1, 2}));
  auto* power = app->add_flag("--power", f.power, "Size-adjusted power curve for one design");
  f.table_opt->excludes(power);
  app->add_option("--model", f.model, "Power: model row label (cnst, sb, arch-0.5773, igarch-0.9-0.1, rs, gbm, ...)")
      ->capture_default_str();
  app->add_option("--kappa", f.kappa, "Power: local-to-unity parameter")->capture_default_str();
  app->add_option("--T", f.T, "Power: sample size (years with --continuous)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_flag("--continuous", f.continuous, "Power: use the continuous-time design");
  app->add_option("--methods", f.methods, "Power: statistics to compare (tau, oracle, nliv, ols)")
      ->delimiter(',')
      ->capture_default_str();
  app->add_option("--reps", f.reps, "Monte Carlo replications per cell")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  f.seed_opt = app->add_option("--seed", f.seed, "Master seed");
  app->add_option("--out-dir", f.out_dir, "Directory for CSV, markdown and SVG artifacts")->capture_default_str();
  app->add_option("--workers", f.workers, "Worker threads (0: all cores; PREDROBUST_WORKERS overrides)");
  app->add_flag("--oracle", f.oracle, "Tables: add the infeasible true-volatility statistic");
  app->add_option("--gbm-variants", f.gbm_variants, "Table 1: GBM diffusion variants to run (omega, omega2)")
      ->delimiter(',')
      ->check(CLI::IsMember({"omega", "omega2"}))
      ->capture_default_str();
  app->add_option("--models", f.models, "Tables: restrict to these row labels")->delimiter(',');
  app->add_option("--sampling", f.sampling, "Table 1: monthly or daily observations")
      ->check(CLI::IsMember({"monthly", "daily"}))
      ->capture_default_str();
  f.smoothing.attach(app);
}

std::string find_label(const std::vector<std::string>& labels, const std::string& wanted) {
  for (const auto& l : labels) {
    if (lower(l) == lower(wanted)) return l;
  }
  return {};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir.string() + "': " + ec.message());
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  body(file);
  if (!file) throw Error(ErrorCode::IoError, "failed while writing '" + path.string() + "'");
}

int cmd_reproduce_table(const ReproduceFlags& f, std::uint64_t seed, std::size_t workers, std::ostream& out) {
  const ReferenceTable table = f.table == 1 ? ReferenceTable::Table1 : ReferenceTable::Table2;
  ReproduceOptions opt;
  opt.reps = f.reps;
  opt.master_seed = seed;
  opt.workers = workers;
  opt.include_oracle = f.oracle;
  opt.kernel = f.smoothing.kernel_spec();
  opt.bandwidth = f.smoothing.bandwidth_spec();
  opt.demeaning = f.smoothing.demeaning();
  opt.sampling = f.sampling == "daily" ? Sampling::Daily : Sampling::Monthly;
  opt.gbm_variants.clear();
  for (const auto& v : f.gbm_variants) {
    opt.gbm_variants.push_back(v == "omega2" ? GbmDiffusion::OmegaSquaredOverRootT : GbmDiffusion::OmegaOverRootT);
  }
  if (opt.gbm_variants.empty()) opt.gbm_variants.push_back(GbmDiffusion::OmegaOverRootT);
  auto known = table_models(table);
  if (table == ReferenceTable::Table1) known.emplace_back("GBM-w2");
  for (const auto& m : f.models) {
    const std::string label = find_label(known, m);
    if (label.empty()) throw UsageError("unknown model '" + m + "' for " + std::string(to_string(table)));
    opt.models.push_back(label);
  }

  const auto start = std::chrono::steady_clock::now();
  const Reproduction rep = reproduce_table(table, opt);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const fs::path dir(f.out_dir);
  ensure_dir(dir);
  const std::string stem(to_string(table));
  write_file(dir / ("size_" + stem + ".csv"), [&](std::ostream& os) { write_size_csv(os, rep.size); });
  write_file(dir / ("deviations_" + stem + ".csv"), [&](std::ostream& os) { write_deviation_csv(os, rep); });
  write_file(dir / ("report_" + stem + ".md"), [&](std::ostream& os) { write_markdown_report(os, rep); });

  write_markdown_report(out, rep);
  out << "\nelapsed: " << format_fixed(seconds, 1) << " s with " << workers << " worker(s)\n";
  out << "wrote " << (dir / ("size_" + stem + ".csv")).string() << ", " << (dir / ("deviations_" + stem + ".csv")).string()
      << ", " << (dir / ("report_" + stem + ".md")).string() << '\n';
  return kExitOk;
}

int cmd_reproduce_power(const ReproduceFlags& f, std::uint64_t seed, std::size_t workers, std::ostream& out) {
  std::string label;
  ReferenceTable table = ReferenceTable::Table2;
  if (!f.continuous) label = find_label(table_models(ReferenceTable::Table2), f.model);
  if (label.empty()) {
    auto cont = table_models(ReferenceTable::Table1);
    cont.emplace_back("GBM-w2");
    label = find_label(cont, f.model);
    table = ReferenceTable::Table1;
  }
  if (label.empty()) throw UsageError("unknown model '" + f.model + "'");

  ReproduceOptions opt;
  opt.sampling = f.sampling == "daily" ? Sampling::Daily : Sampling::Monthly;
  McConfig config;
  config.dgp = table_dgp(table, label, f.kappa, f.T, opt);
  config.reps = f.reps;
  config.master_seed = seed;
  config.workers = workers;
  config.kernel = f.smoothing.kernel_spec();
  config.bandwidth = f.smoothing.bandwidth_spec();
  config.demeaning = f.smoothing.demeaning();
  config.model_label = label;
  config.cell = table_cell_index(table, label, f.kappa, f.T);
  config.methods.clear();
  for (const Method m : parse_methods(f.methods)) {
    config.methods.push_back({m, m == Method::OlsT ? Alternative::Greater : Alternative::TwoSided});
  }
  const PowerCurve curve = run_power(config);

  const fs::path dir(f.out_dir);
  ensure_dir(dir);
  std::ostringstream stem;
  stem << "power_" << lower(label) << "_k" << format_fixed(f.kappa, 0) << "_T" << f.T;
  const fs::path csv = dir / (stem.str() + ".csv");
  const fs::path svg = dir / (stem.str() + ".svg");
  write_file(csv, [&](std::ostream& os) { write_power_csv(os, curve); });
  write_file(svg, [&](std::ostream& os) { write_power_svg(os, curve); });

  out << "size-adjusted power: " << label << ", kappa=" << format_fixed(f.kappa, 1) << ", T=" << f.T
      << ", reps=" << curve.reps << ", seed=" << curve.seed << '\n';
  out << std::left << std::setw(10) << "beta_bar";
  for (const auto& s : curve.series) out << std::setw(22) << s.method.label();
  out << '\n';
  for (std::size_t i = 0; i < curve.beta_grid.size(); ++i) {
    out << std::setw(10) << format_fixed(curve.beta_grid[i], 1);
    for (const auto& s : curve.series) out << std::setw(22) << format_fixed(s.reject_rate[i], 4);
    out << '\n';
  }
  out << "wrote " << csv.string() << ", " << svg.string() << '\n';
  return kExitOk;
}

int cmd_reproduce(const ReproduceFlags& f, std::ostream& out) {
  if (f.table_opt->count() == 0 && !f.power) throw UsageError("reproduce needs --table 1|2 or --power");
  const std::size_t workers = resolve_workers(f.workers);
  const std::uint64_t seed = resolve_seed(f.seed_opt, f.seed, out);
  return f.power ? cmd_reproduce_power(f, seed, workers, out) : cmd_reproduce_table(f, seed, workers, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Volatility-robust tests for return predictability"};
  app.name("predrobust");
  app.set_config("--config", "", "TOML configuration file (command-line flags take precedence)");
  app.require_subcommand(1);

  TestFlags test_flags;
  SimulateFlags sim_flags;
  ReproduceFlags rep_flags;
  auto* test_cmd = app.add_subcommand("test", "Run the predictability test on a CSV of (y, x)");
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate a dataset and write it as CSV");
  auto* rep_cmd = app.add_subcommand("reproduce", "Reproduce the size tables or a power curve");
  attach(test_cmd, test_flags);
  attach(sim_cmd, sim_flags);
  attach(rep_cmd, rep_flags);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    err << "run 'predrobust --help' for usage\n";
    return kExitUsage;
  }

  for (const auto* sub : {test_cmd, sim_cmd, rep_cmd}) {
    if (*sub) err << "# resolved configuration\n[" << sub->get_name() << "]\n" << sub->config_to_str(true, false);
  }

  try {
    if (*test_cmd) return cmd_test(test_flags, out);
    if (*sim_cmd) return cmd_simulate(sim_flags, out);
    return cmd_reproduce(rep_flags, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace predrobust::cli
