#include <doctest.h>

#include <sstream>

#include "mortality/data_io.hpp"
#include "mortality/errors.hpp"
#include "support.hpp"

using namespace mortality;
using support::toy_params;
using support::toy_spec;

namespace {

const char* kDeathsText =
    "United Kingdom, Deaths (period 1x1), \tLast modified: 01 Jan 2020\n"
    "\n"
    "  Year          Age             Female            Male           Total\n"
    "  2000           65            1000.00         1500.00         2500.00\n"
    "  2000           66            1100.00         1600.00         2700.00\n"
    "  2001           65             990.00         1480.00         2470.00\n"
    "  2001           66               .            1590.00         2680.00\n"
    "  2001-          67               1.00            1.00            2.00\n"
    "  2001+          67            1200.00         1700.00         2900.00\n"
    "  2001           110+             3.00            0.00            3.00\n";

const char* kDeathsCsv =
    "Year,Age,Female,Male,Total\n"
    "2000,65,1000.00,1500.00,2500.00\n"
    "2000,66,1100.00,1600.00,2700.00\n"
    "2001,65,990.00,1480.00,2470.00\n"
    "2001,66,.,1590.00,2680.00\n"
    "2001-,67,1.00,1.00,2.00\n"
    "2001+,67,1200.00,1700.00,2900.00\n"
    "2001,110+,3.00,0.00,3.00\n";

RawVitalTable parse(const std::string& text, const std::string& name = "mem") {
  std::istringstream in(text);
  return parse_vital_table(in, name);
}

RawVitalTable table_of(TableKind kind,
                       const std::vector<std::tuple<int, int, double>>& cells) {
  RawVitalTable t;
  t.kind = kind;
  t.source = kind == TableKind::Deaths ? "deaths" : "exposures";
  for (auto [year, age, v] : cells) t.rows.push_back({year, age, false, v, v, v});
  return t;
}

}  // namespace

TEST_CASE("period tables parse in both layouts") {
  const auto ws = parse(kDeathsText);
  const auto csv = parse(kDeathsCsv);
  CHECK(ws.kind == TableKind::Deaths);
  REQUIRE(ws.rows.size() == 6);
  REQUIRE(csv.rows.size() == 6);
  for (std::size_t k = 0; k < ws.rows.size(); ++k) {
    const auto &a = ws.rows[k], &b = csv.rows[k];
    CHECK(a.year == b.year);
    CHECK(a.age == b.age);
    CHECK(a.openAge == b.openAge);
    CHECK(a.male == b.male);
    CHECK(a.total == b.total);
    CHECK((a.female == b.female || (std::isnan(a.female) && std::isnan(b.female))));
  }
  CHECK(std::isnan(ws.find(2001, 66)->female));
  CHECK(ws.find(2001, 67)->male == 1700.0);
  CHECK(ws.find(2001, 110)->openAge);
  CHECK(ws.find(1999, 65) == nullptr);
}

TEST_CASE("malformed tables are rejected") {
  CHECK_THROWS_AS(parse("Year Age Female Male Total\n2000 65 1 1 1\n2000 65 2 2 2\n"),
                  DataError);
  CHECK_THROWS_AS(parse("Year Age Female Male Total\n2000 65 1 -1 1\n"), DataError);
  CHECK_THROWS_AS(parse("Year Age Female Male Total\n2000 65 1 1\n"), DataError);
  CHECK_THROWS_AS(parse("Year Age Female Male Total\n2000 6x 1 1 1\n"), DataError);
  CHECK_THROWS_AS(parse("no header here\n2000 65 1 1 1\n"), DataError);
  try {
    parse("Year Age Female Male Total\n2000 65 1 1 1\n2000 65 2 2 2\n", "D.txt");
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("D.txt:3") != std::string::npos);
  }
  CHECK_THROWS_AS(read_vital_table("/nonexistent/deaths.txt"), DataError);
}

TEST_CASE("crude log rates") {
  const AgeYearWindow w(65, 66, 2000, 2001);
  const auto D = table_of(TableKind::Deaths, {{2000, 65, 10}, {2000, 66, 7},
                                              {2001, 65, 3}, {2001, 66, 5}});
  const auto E = table_of(TableKind::Exposures, {{2000, 65, 1000}, {2000, 66, 7},
                                                 {2001, 65, 30}, {2001, 66, 50}});
  const auto panel = crude_rates(D, E, Sex::Male, w);
  CHECK(panel.logRates(0, 0) == doctest::Approx(-4.60517).epsilon(1e-6));
  CHECK(panel.logRates(1, 0) == 0.0);
  CHECK(panel.logRates(0, 1) == doctest::Approx(std::log(0.1)));
  CHECK(death_probability(0.01) == doctest::Approx(0.0099502).epsilon(1e-6));
  CHECK(death_probability(0.0) == 0.0);
  CHECK(initial_exposure(1000, 10) == 1005);
}

TEST_CASE("bad cells are reported by age and year") {
  const AgeYearWindow w(65, 66, 2000, 2001);
  const auto E = table_of(TableKind::Exposures, {{2000, 65, 100}, {2000, 66, 100},
                                                 {2001, 65, 100}, {2001, 66, 100}});
  auto expectCell = [&](const RawVitalTable& D, const RawVitalTable& Ex,
                        const std::string& needle) {
    try {
      crude_rates(D, Ex, Sex::Total, w);
      FAIL("expected a DataError");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find(needle) != std::string::npos);
    }
  };
  auto D = table_of(TableKind::Deaths, {{2000, 65, 1}, {2000, 66, 1},
                                        {2001, 65, 0}, {2001, 66, 1}});
  expectCell(D, E, "zero deaths at (age 65, year 2001)");
  auto Ez = E;
  Ez.rows[1].total = 0;
  D.rows[2].total = 2;
  expectCell(D, Ez, "zero exposure at (age 66, year 2000)");
  auto Dm = D;
  Dm.rows.pop_back();
  expectCell(Dm, E, "missing cell (age 66, year 2001)");
  auto Dn = D;
  Dn.rows[0].total = std::nan("");
  expectCell(Dn, E, "missing value at (age 65, year 2000)");
  auto Do = D;
  Do.rows[3].openAge = true;
  expectCell(Do, E, "(age 66, year 2001)");
}

TEST_CASE("panels written as unit-exposure tables come back unchanged") {
  const auto spec = toy_spec(ModelKind::FullCohort, 4, 5, 70, 1990);
  const auto truth = support::toy_truth(spec, toy_params(spec), 6);
  std::ostringstream deaths, exposures;
  deaths << "Year Age Female Male Total\n";
  exposures << "Year,Age,Female,Male,Total\n";
  for (int j = 0; j < 5; ++j) {
    for (int i = 0; i < 4; ++i) {
      const auto v = format_double(std::exp(truth.panel.logRates(i, j)));
      deaths << spec.window.year(j) << ' ' << spec.window.age(i) << ' ' << v << ' '
             << v << ' ' << v << '\n';
      exposures << spec.window.year(j) << ',' << spec.window.age(i) << ",1,1,1\n";
    }
  }
  const auto panel = crude_rates(parse(deaths.str()), parse(exposures.str()),
                                 Sex::Female, spec.window);
  CHECK((panel.logRates - truth.panel.logRates).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("panel files round-trip exactly") {
  const auto spec = toy_spec(ModelKind::LeeCarter, 3, 4, 65, 1970);
  const auto truth = support::toy_truth(spec, toy_params(spec), 3);
  std::stringstream csv;
  write_panel_csv(truth.panel, csv);
  const auto back = read_panel_csv(csv, "mem");
  CHECK(back.window == truth.panel.window);
  CHECK(back.logRates == truth.panel.logRates);
  CHECK(panel_from_json(panel_to_json(truth.panel)).logRates == truth.panel.logRates);

  const auto dir = support::scratch_dir("panel");
  save_panel(truth.panel, dir / "p.json");
  save_panel(truth.panel, dir / "p.csv");
  CHECK(load_panel(dir / "p.json").logRates == truth.panel.logRates);
  CHECK(load_panel(dir / "p.csv").logRates == truth.panel.logRates);
  std::istringstream bad("age,1970,1972\n65,1,2\n66,1,2\n");
  CHECK_THROWS_AS(read_panel_csv(bad, "bad"), DataError);
  CHECK_THROWS_AS(load_panel(dir / "missing.csv"), DataError);
}

TEST_CASE("parameter JSON round-trips and is validated") {
  for (auto kind : {ModelKind::LeeCarter, ModelKind::SimplifiedCohort,
                    ModelKind::FullCohort}) {
    const auto spec = toy_spec(kind, 4, 5);
    const auto s = toy_params(spec);
    const auto back = params_from_json(params_to_json(s), spec);
    CHECK(back.alpha == s.alpha);
    CHECK(back.beta == s.beta);
    CHECK(back.betaGamma == s.betaGamma);
    CHECK(back.theta == s.theta);
    CHECK(back.sigma2Kappa == s.sigma2Kappa);
    if (spec.hasCohort()) CHECK(back.lambda == s.lambda);
  }
  const auto spec = toy_spec(ModelKind::FullCohort, 4, 5);
  auto j = params_to_json(toy_params(spec));
  j["alpha"] = std::vector<double>{1, 2};
  CHECK_THROWS_AS(params_from_json(j, spec), DataError);
  j.erase("alpha");
  CHECK_THROWS_AS(params_from_json(j, spec), DataError);
}

TEST_CASE("simulation: zero variances, determinism and innovation variance") {
  const auto spec = toy_spec(ModelKind::FullCohort, 4, 6);
  auto s = toy_params(spec);
  s.sigma2Eps = s.sigma2Kappa = s.sigma2Gamma = 0;
  Eigen::VectorXd phi0(5);
  phi0 << 0.5, 0.1, -0.2, 0.3, 0.05;
  const auto a = simulate_panel(spec, s, phi0, 1);
  const auto b = simulate_panel(spec, s, phi0, 2);
  CHECK(a.panel.logRates == b.panel.logRates);
  // kappa_t = kappa_0 + t theta; the newest cohort follows the AR mean path.
  double g = phi0(1);
  for (int t = 1; t <= 6; ++t) {
    g = s.lambda * g + s.eta;
    CHECK(a.path.states(0, t) == doctest::Approx(0.5 + t * s.theta).epsilon(1e-13));
    CHECK(a.path.states(1, t) == doctest::Approx(g).epsilon(1e-13));
  }
  CHECK((a.panel.logRates - fitted_means(spec, s, a.path)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(cohort_shift_violation(a.path) == 0.0);

  auto noisy = toy_params(spec);
  const auto c = simulate_panel(spec, noisy, phi0, 9);
  const auto d = simulate_panel(spec, noisy, phi0, 9);
  CHECK(c.panel.logRates == d.panel.logRates);
  CHECK(c.path.states == d.path.states);
  CHECK(cohort_shift_violation(c.path) == 0.0);

  const auto lc = toy_spec(ModelKind::LeeCarter, 2, 10000);
  auto sl = toy_params(lc);
  const auto long_run = simulate_panel(lc, sl, Eigen::VectorXd::Zero(1), 4);
  double ss = 0;
  for (int t = 1; t <= 10000; ++t) {
    const double e = long_run.path.states(0, t) - long_run.path.states(0, t - 1) - sl.theta;
    ss += e * e;
  }
  CHECK(std::abs(ss / 10000 - sl.sigma2Kappa) < 0.05 * sl.sigma2Kappa);
}

TEST_CASE("truth JSON records the factors") {
  const auto spec = toy_spec(ModelKind::SimplifiedCohort, 3, 4, 60, 2000);
  const auto truth = support::toy_truth(spec, toy_params(spec), 3);
  const auto j = truth_to_json(truth);
  CHECK(j.at("model") == "simplified-cohort");
  CHECK(j.at("kappa").size() == 5);
  CHECK(j.at("cohorts").size() == 6);
  CHECK(j.at("firstCohort") == 2000 - 62);
  CHECK(j.at("seed") == 3);
}

TEST_CASE("shortest round-trip number formatting") {
  for (double v : {0.1, -4.605170185988091, 1e-300, 3.0, 2.0 / 3.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.25) == "0.25");
}
