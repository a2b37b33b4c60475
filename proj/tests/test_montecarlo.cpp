#include "predrobust/inference.hpp"
#include "predrobust/montecarlo.hpp"
#include "predrobust/reference.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <set>
#include <sstream>

using namespace predrobust;

namespace {

McConfig small_config(Eigen::Index T = 60, std::size_t reps = 200) {
  McConfig c;
  DiscreteDgpConfig d;
  d.T = T;
  c.dgp = d;
  c.reps = reps;
  c.methods = {{Method::TauSigmaHat, Alternative::TwoSided},
               {Method::TauOracle, Alternative::TwoSided},
               {Method::OlsT, Alternative::Greater},
               {Method::TauNonlinearIV, Alternative::TwoSided}};
  c.master_seed = 123;
  return c;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("method labels") {
  CHECK(MethodSpec{Method::TauSigmaHat, Alternative::TwoSided}.label() == "tau_sigma_hat");
  CHECK(MethodSpec{Method::OlsT, Alternative::Greater}.label() == "ols_t_greater");
}

TEST_CASE("default instrument") {
  const auto g = default_gamma();
  CHECK(g(0.0) == 0.0);
  CHECK(g(1.0) == doctest::Approx(std::exp(-0.5)));
  CHECK(g(-2.0) == doctest::Approx(-2.0 * std::exp(-2.0)));
}

TEST_CASE("configuration validation") {
  auto c = small_config();
  CHECK_NOTHROW(c.validate());
  c.reps = kMinReps - 1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_config();
  c.levels = {0.05, 1.0};
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_config();
  c.methods.clear();
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("replication statistics are independent of the worker count") {
  auto c = small_config();
  const auto one = simulate_statistics(c);
  c.workers = 3;
  const auto three = simulate_statistics(c);
  c.workers = 16;
  const auto sixteen = simulate_statistics(c);
  REQUIRE(one.stats.size() == 4);
  for (std::size_t m = 0; m < one.stats.size(); ++m) {
    for (std::size_t r = 0; r < c.reps; ++r) {
      CHECK(std::memcmp(&one.stats[m][r], &three.stats[m][r], sizeof(double)) == 0);
      CHECK(std::memcmp(&one.stats[m][r], &sixteen.stats[m][r], sizeof(double)) == 0);
    }
  }
}

TEST_CASE("extending the replication count keeps earlier draws") {
  auto c = small_config(60, 150);
  const auto short_run = simulate_statistics(c);
  c.reps = 300;
  const auto long_run = simulate_statistics(c);
  for (std::size_t m = 0; m < short_run.stats.size(); ++m) {
    for (std::size_t r = 0; r < 150; ++r) CHECK(short_run.stats[m][r] == long_run.stats[m][r]);
  }
}

TEST_CASE("grid cells draw from distinct substreams") {
  auto c = small_config();
  const auto a = simulate_statistics(c);
  c.cell = 1;
  const auto b = simulate_statistics(c);
  CHECK(a.stats[0][0] != b.stats[0][0]);
}

TEST_CASE("size table agrees with a direct count of the draws") {
  auto c = small_config(120, 400);
  c.levels = {0.05, 0.10};
  const auto draws = simulate_statistics(c);
  const auto table = run_size(c);
  REQUIRE(table.cells.size() == 8);
  for (const auto& cell : table.cells) {
    std::size_t m = 0;
    while (c.methods[m].method != cell.method.method) ++m;
    const double cv = normal_critical_value(cell.level, cell.method.alternative);
    std::size_t hits = 0, ok = 0;
    for (double s : draws.stats[m]) {
      if (std::isnan(s)) continue;
      ++ok;
      hits += rejects(s, cv, cell.method.alternative) ? 1 : 0;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(ok);
    CHECK(cell.reject_pct == doctest::Approx(100.0 * p));
    CHECK(cell.mc_se == doctest::Approx(100.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(ok))));
    CHECK(cell.reject_pct >= 0.0);
    CHECK(cell.reject_pct <= 100.0);
    CHECK(cell.reps == 400);
    CHECK(cell.seed == 123);
  }
  CHECK(table.find(c.label(), Method::OlsT, 0.0, 120, 0.10) != nullptr);
  CHECK(table.find(c.label(), Method::OlsT, 5.0, 120) == nullptr);
}

TEST_CASE("size forces the null even when beta_bar is set") {
  auto c = small_config(60, 200);
  auto d = std::get<DiscreteDgpConfig>(c.dgp);
  d.beta_bar = 50.0;
  c.dgp = d;
  const auto shifted = run_size(c);
  d.beta_bar = 0.0;
  c.dgp = d;
  const auto null = run_size(c);
  for (std::size_t i = 0; i < null.cells.size(); ++i) CHECK(null.cells[i].reject_pct == shifted.cells[i].reject_pct);
}

TEST_CASE("oracle size on a unit-volatility null is within three standard errors") {
  McConfig c;
  DiscreteDgpConfig d;
  d.T = 200;
  d.rho_eps_eta = 0.0;
  c.dgp = d;
  c.reps = 100;
  c.methods = {{Method::TauOracle, Alternative::TwoSided}};
  c.master_seed = 9;
  const auto t = run_size(c);
  const double se = 100.0 * std::sqrt(0.05 * 0.95 / 100.0);
  CHECK(std::abs(t.cells[0].reject_pct - 5.0) <= 3.0 * se);
}

TEST_CASE("power curve is size-adjusted at the origin") {
  auto c = small_config(120, 1000);
  c.methods = {{Method::TauSigmaHat, Alternative::TwoSided}, {Method::OlsT, Alternative::Greater}};
  const std::vector<double> grid{0.0, 10.0, 40.0};
  const auto curve = run_power(c, grid);
  REQUIRE(curve.series.size() == 2);
  for (const auto& s : curve.series) {
    CHECK(s.reject_rate[0] == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(s.reject_rate[2] > s.reject_rate[0]);
    CHECK(std::isfinite(s.critical_value));
  }
  CHECK(curve.beta_grid == grid);

  CHECK_THROWS_AS(run_power(small_config(60, 500), grid), Error);  // too few null draws
  CHECK_THROWS_AS(run_power(c, std::vector<double>{5.0, 10.0}), Error);
  CHECK(default_beta_grid().size() == 11);
  CHECK(default_beta_grid().front() == 0.0);
  CHECK(default_beta_grid().back() == 20.0);
}

TEST_CASE("too many failed replications abort the cell") {
  McConfig c;
  ContinuousDgpConfig d;
  d.years = 5;
  GbmVol g;
  g.diffusion = GbmDiffusion::OmegaSquaredOverRootT;
  d.vol = g;
  c.dgp = d;
  c.reps = 100;
  try {
    run_size(c);
    FAIL("expected TooManyFailures");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooManyFailures);
  }
}

TEST_CASE("reference table layout") {
  CHECK(table_models(ReferenceTable::Table1) == std::vector<std::string>{"CNST", "SB", "RS", "GBM"});
  CHECK(table_models(ReferenceTable::Table2).size() == 6);
  CHECK(table_columns(ReferenceTable::Table1) == std::vector<std::int64_t>{5, 20, 50});
  CHECK(table_columns(ReferenceTable::Table2) == std::vector<std::int64_t>{60, 240, 600});
  CHECK(table_kappas() == std::vector<double>{0.0, 5.0, 20.0});

  std::set<std::uint64_t> cells;
  std::size_t n = 0;
  for (auto table : {ReferenceTable::Table1, ReferenceTable::Table2}) {
    for (const auto& m : table_models(table)) {
      for (double k : table_kappas()) {
        for (auto col : table_columns(table)) {
          cells.insert(table_cell_index(table, m, k, col));
          ++n;
        }
      }
    }
  }
  CHECK(cells.size() == n);
}

TEST_CASE("table rows map to volatility designs") {
  const auto ig = std::get<DiscreteDgpConfig>(table_dgp(ReferenceTable::Table2, "IGARCH-0.9-0.1", 5.0, 240));
  const auto& g = std::get<GarchVol>(ig.vol);
  CHECK(g.alpha == 0.1);
  CHECK(g.beta == 0.9);
  CHECK(ig.T == 240);
  CHECK(ig.kappa_bar == 5.0);
  const auto arch = std::get<GarchVol>(std::get<DiscreteDgpConfig>(table_dgp(ReferenceTable::Table2, "ARCH-0.5773", 0, 60)).vol);
  CHECK(arch.alpha == 0.5773);
  CHECK(arch.beta == 0.0);
  const auto gbm = std::get<ContinuousDgpConfig>(table_dgp(ReferenceTable::Table1, "GBM-w2", 0, 20));
  CHECK(gbm.years == 20);
  CHECK(std::get<GbmVol>(gbm.vol).diffusion == GbmDiffusion::OmegaSquaredOverRootT);
  CHECK_THROWS_AS(table_dgp(ReferenceTable::Table2, "GBM", 0, 60), Error);
}

TEST_CASE("reference values") {
  auto tau2 = [](const char* m, double k, std::int64_t c) { return *reference_value(ReferenceTable::Table2, m, "tau", k, c); };
  CHECK(tau2("CNST", 0, 60) == 5.5);
  CHECK(tau2("CNST", 0, 240) == 5.1);
  CHECK(tau2("CNST", 0, 600) == 5.0);
  CHECK(tau2("SB", 0, 60) == 8.0);
  CHECK(tau2("SB", 0, 600) == 6.3);
  CHECK(tau2("IGARCH-0.9-0.1", 0, 60) == 6.2);
  CHECK(*reference_value(ReferenceTable::Table2, "CNST", "OLS", 0, 240) == 43.8);
  CHECK(*reference_value(ReferenceTable::Table1, "CNST", "tau", 0, 5) == 5.6);
  CHECK(*reference_value(ReferenceTable::Table1, "GBM", "tau", 0, 50) == 6.1);
  CHECK_FALSE(reference_value(ReferenceTable::Table2, "CNST", "Cauchy RT", 0, 60).has_value());
  CHECK_FALSE(reference_value(ReferenceTable::Table2, "CNST", "tau", 1.0, 60).has_value());
  CHECK_FALSE(reference_value(ReferenceTable::Table2, "CNST", "tau", 0, 61).has_value());
  CHECK(reference_rows().size() == 44);
  for (const auto& row : reference_rows()) {
    for (double v : row.cells) {
      CHECK(v > 0.0);
      CHECK(v < 100.0);
    }
  }
}

TEST_CASE("table reproduction and its artifacts") {
  ReproduceOptions opt;
  opt.reps = 100;
  opt.models = {"CNST"};
  opt.include_oracle = true;
  const auto rep = reproduce_table(ReferenceTable::Table2, opt);
  CHECK(rep.size.cells.size() == 27);
  std::size_t compared = 0, missing = 0;
  for (const auto& d : rep.deviations) {
    if (!d.implemented) {
      ++missing;
      CHECK_FALSE(d.ours.has_value());
      continue;
    }
    if (d.reference && d.ours) {
      ++compared;
      CHECK(*d.abs_deviation() == doctest::Approx(std::abs(*d.reference - *d.ours)));
    }
  }
  CHECK(compared == 18);  // OLS and tau; the oracle has no reference column
  CHECK(missing == 18);   // BQ and RLRT

  std::ostringstream size_csv, dev_csv, md;
  write_size_csv(size_csv, rep.size);
  write_deviation_csv(dev_csv, rep);
  write_markdown_report(md, rep);
  const auto s = lines(size_csv.str());
  CHECK(s.front() == "model,method,kappa,T,level,reject_pct,mc_se,reps,seed");
  CHECK(s.size() == 28);
  const auto dv = lines(dev_csv.str());
  CHECK(dv.front() == "model,method,kappa,T,reference,ours,abs_dev,mc_se,status");
  CHECK(md.str().find("not implemented") != std::string::npos);
  CHECK(md.str().find("| CNST |") != std::string::npos);

  CHECK_THROWS_AS(reproduce_table(ReferenceTable::Table2, [] {
                    ReproduceOptions o;
                    o.reps = 100;
                    o.models = {"RS"};
                    return o;
                  }()),
                  Error);
}

TEST_CASE("aborted cells are reported instead of ending the run") {
  ReproduceOptions opt;
  opt.reps = 100;
  opt.gbm_variants = {GbmDiffusion::OmegaSquaredOverRootT};
  opt.models = {"GBM-w2"};
  const auto rep = reproduce_table(ReferenceTable::Table1, opt);
  std::size_t aborted = 0;
  for (const auto& d : rep.deviations) aborted += d.error.empty() ? 0 : 1;
  CHECK(aborted > 0);
  std::ostringstream dev;
  write_deviation_csv(dev, rep);
  CHECK(dev.str().find(",aborted") != std::string::npos);
}

TEST_CASE("power artifacts") {
  auto c = small_config(60, 1000);
  c.methods = {{Method::TauSigmaHat, Alternative::TwoSided}};
  c.model_label = "CNST";
  const auto curve = run_power(c, {0.0, 5.0});
  std::ostringstream csv, svg;
  write_power_csv(csv, curve);
  write_power_svg(svg, curve);
  const auto l = lines(csv.str());
  REQUIRE(l.size() == 3);
  CHECK(l[0] == "model,method,kappa,T,level,beta_bar,reject_rate,mc_se,critical_value,reps,seed");
  CHECK(l[1].rfind("CNST,tau_sigma_hat,0,60,0.0500,0,0.0500,", 0) == 0);
  CHECK(svg.str().rfind("<svg", 0) == 0);
  CHECK(svg.str().find("polyline") != std::string::npos);
}
