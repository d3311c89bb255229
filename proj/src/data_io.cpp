#include "mortality/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mortality/errors.hpp"
#include "mortality/random.hpp"

namespace mortality {

Sex parse_sex(const std::string& name) {
  if (name == "female" || name == "Female") return Sex::Female;
  if (name == "male" || name == "Male") return Sex::Male;
  if (name == "total" || name == "Total") return Sex::Total;
  throw std::invalid_argument("unknown sex '" + name +
                              "' (expected female, male, total)");
}

double VitalRow::value(Sex sex) const {
  switch (sex) {
    case Sex::Female:
      return female;
    case Sex::Male:
      return male;
    case Sex::Total:
      return total;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

const VitalRow* RawVitalTable::find(int year, int age) const {
  for (const auto& r : rows) {
    if (r.year == year && r.age == age) return &r;
  }
  return nullptr;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  if (line.find(',') != std::string::npos) {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
  } else {
    std::stringstream ss(line);
    std::string field;
    while (ss >> field) out.push_back(field);
  }
  return out;
}

[[noreturn]] void fail(const std::string& source, int lineNo,
                       const std::string& what) {
  throw DataError(source + ":" + std::to_string(lineNo) + ": " + what);
}

int parseInt(const std::string& token, const std::string& source, int lineNo) {
  int value = 0;
  auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    fail(source, lineNo, "expected an integer, got '" + token + "'");
  }
  return value;
}

double parseValue(const std::string& token, const std::string& source,
                  int lineNo) {
  if (token == "." || token == "NA" || token.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double value = 0.0;
  auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    fail(source, lineNo, "expected a number, got '" + token + "'");
  }
  if (value < 0.0) fail(source, lineNo, "negative value " + token);
  return value;
}

}  // namespace

RawVitalTable parse_vital_table(std::istream& in, const std::string& source,
                                TableKind kind) {
  RawVitalTable table;
  table.kind = kind;
  table.source = source;
  std::string line;
  int lineNo = 0;
  bool inBody = false;
  while (std::getline(in, line)) {
    ++lineNo;
    const std::string text = trim(line);
    if (text.empty()) continue;
    if (!inBody) {
      const auto tokens = tokenize(text);
      if (!tokens.empty() && tokens[0] == "Year") {
        if (tokens.size() != 5 || tokens[1] != "Age") {
          fail(source, lineNo, "expected header Year Age Female Male Total");
        }
        inBody = true;
      } else if (table.kind == TableKind::Unknown) {
        if (text.find("Deaths") != std::string::npos) {
          table.kind = TableKind::Deaths;
        } else if (text.find("xposure") != std::string::npos) {
          table.kind = TableKind::Exposures;
        }
      }
      continue;
    }
    const auto tokens = tokenize(text);
    if (tokens.size() != 5) {
      fail(source, lineNo,
           "expected 5 fields, found " + std::to_string(tokens.size()));
    }
    std::string yearToken = tokens[0];
    // Territorial-change years appear twice as "YYYY-" and "YYYY+"; the "+"
    // row continues the series.
    if (!yearToken.empty() && yearToken.back() == '-') continue;
    if (!yearToken.empty() && yearToken.back() == '+') yearToken.pop_back();

    VitalRow row;
    row.year = parseInt(yearToken, source, lineNo);
    std::string ageToken = tokens[1];
    if (!ageToken.empty() && ageToken.back() == '+') {
      row.openAge = true;
      ageToken.pop_back();
    }
    row.age = parseInt(ageToken, source, lineNo);
    row.female = parseValue(tokens[2], source, lineNo);
    row.male = parseValue(tokens[3], source, lineNo);
    row.total = parseValue(tokens[4], source, lineNo);
    if (table.find(row.year, row.age) != nullptr) {
      fail(source, lineNo,
           "duplicate row for year " + std::to_string(row.year) + ", age " +
               std::to_string(row.age));
    }
    table.rows.push_back(row);
  }
  if (!inBody) throw DataError(source + ": no 'Year Age ...' header found");
  return table;
}

RawVitalTable read_vital_table(const std::filesystem::path& file,
                               TableKind kind) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open " + file.string());
  return parse_vital_table(in, file.string(), kind);
}

DataPanel crude_rates(const RawVitalTable& deaths,
                      const RawVitalTable& exposures, Sex sex,
                      const AgeYearWindow& window) {
  Eigen::MatrixXd logRates(window.numAges(), window.numYears());
  for (int i = 0; i < window.numAges(); ++i) {
    for (int j = 0; j < window.numYears(); ++j) {
      const int age = window.age(i);
      const int year = window.year(j);
      const std::string cell =
          "(age " + std::to_string(age) + ", year " + std::to_string(year) + ")";
      const VitalRow* d = deaths.find(year, age);
      const VitalRow* e = exposures.find(year, age);
      if (d == nullptr) throw DataError(deaths.source + ": missing cell " + cell);
      if (e == nullptr) {
        throw DataError(exposures.source + ": missing cell " + cell);
      }
      if (d->openAge || e->openAge) {
        throw DataError("cell " + cell +
                        " is an open age interval and cannot be windowed");
      }
      const double D = d->value(sex);
      const double E = e->value(sex);
      if (std::isnan(D)) throw DataError(deaths.source + ": missing value at " + cell);
      if (std::isnan(E)) {
        throw DataError(exposures.source + ": missing value at " + cell);
      }
      if (!(E > 0.0)) {
        throw DataError(exposures.source + ": zero exposure at " + cell);
      }
      if (!(D > 0.0)) {
        throw DataError(deaths.source + ": zero deaths at " + cell +
                        " (log rate undefined)");
      }
      logRates(i, j) = std::log(D / E);
    }
  }
  return DataPanel(window, std::move(logRates));
}

double death_probability(double centralRate) {
  return -std::expm1(-centralRate);
}

double initial_exposure(double centralExposure, double deaths) {
  return centralExposure + 0.5 * deaths;
}

SyntheticTruth simulate_panel(const ModelSpec& spec, const StaticParams& params,
                              const Eigen::VectorXd& initialState,
                              std::uint64_t seed) {
  const SystemMatrices sys = build_system(spec, params);
  const int d = spec.stateDim();
  const int p = spec.window.numAges();
  const int n = spec.window.numYears();
  if (initialState.size() != d) {
    throw std::invalid_argument("initial state has the wrong dimension");
  }
  Rng rng(seed);
  const Eigen::VectorXd stateSd = sys.transNoiseCov.diagonal().cwiseSqrt();
  const double obsSd = std::sqrt(sys.obsNoiseVar);

  StatePath path;
  path.states.resize(d, n + 1);
  path.states.col(0) = initialState;
  Eigen::MatrixXd y(p, n);
  for (int t = 1; t <= n; ++t) {
    Eigen::VectorXd next = sys.transMatrix * path.states.col(t - 1) +
                           sys.transIntercept;
    for (int r = 0; r < d; ++r) {
      if (stateSd(r) > 0.0) next(r) += stateSd(r) * rng.normal();
    }
    path.states.col(t) = next;
    y.col(t - 1) = sys.obsIntercept + sys.obsMatrix * next;
    if (obsSd > 0.0) {
      for (int i = 0; i < p; ++i) y(i, t - 1) += obsSd * rng.normal();
    }
  }
  return {spec, params, std::move(path), DataPanel(spec.window, std::move(y)),
          seed};
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_panel_csv(const DataPanel& panel, std::ostream& out) {
  out << "age";
  for (int j = 0; j < panel.numYears(); ++j) out << ',' << panel.window.year(j);
  out << '\n';
  for (int i = 0; i < panel.numAges(); ++i) {
    out << panel.window.age(i);
    for (int j = 0; j < panel.numYears(); ++j) {
      out << ',' << format_double(panel.logRates(i, j));
    }
    out << '\n';
  }
}

DataPanel read_panel_csv(std::istream& in, const std::string& source) {
  std::string line;
  int lineNo = 0;
  std::vector<int> years;
  std::vector<int> ages;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineNo;
    if (trim(line).empty()) continue;
    auto tokens = tokenize(line);
    if (years.empty()) {
      if (tokens.empty() || tokens[0] != "age") {
        fail(source, lineNo, "panel header must start with 'age'");
      }
      for (std::size_t k = 1; k < tokens.size(); ++k) {
        years.push_back(parseInt(tokens[k], source, lineNo));
      }
      continue;
    }
    if (tokens.size() != years.size() + 1) {
      fail(source, lineNo, "expected " + std::to_string(years.size() + 1) +
                               " fields, found " + std::to_string(tokens.size()));
    }
    ages.push_back(parseInt(tokens[0], source, lineNo));
    std::vector<double> row;
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(tokens[k].data(),
                                       tokens[k].data() + tokens[k].size(), v);
      if (ec != std::errc() || ptr != tokens[k].data() + tokens[k].size()) {
        fail(source, lineNo, "bad number '" + tokens[k] + "'");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (years.empty() || ages.empty()) throw DataError(source + ": empty panel");
  const auto window = AgeYearWindow::fromLists(ages, years);
  Eigen::MatrixXd rates(ages.size(), years.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < years.size(); ++j) rates(i, j) = rows[i][j];
  }
  return DataPanel(window, std::move(rates));
}

nlohmann::json panel_to_json(const DataPanel& panel) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < panel.numAges(); ++i) {
    std::vector<double> row(panel.numYears());
    for (int j = 0; j < panel.numYears(); ++j) row[j] = panel.logRates(i, j);
    rows.push_back(row);
  }
  return {{"ages", panel.window.ages()},
          {"years", panel.window.years()},
          {"logRates", rows}};
}

DataPanel panel_from_json(const nlohmann::json& j) {
  try {
    const auto ages = j.at("ages").get<std::vector<int>>();
    const auto years = j.at("years").get<std::vector<int>>();
    const auto rows = j.at("logRates").get<std::vector<std::vector<double>>>();
    const auto window = AgeYearWindow::fromLists(ages, years);
    if (rows.size() != ages.size()) throw DataError("panel JSON: row count");
    Eigen::MatrixXd rates(ages.size(), years.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != years.size()) {
        throw DataError("panel JSON: column count");
      }
      for (std::size_t k = 0; k < years.size(); ++k) rates(i, k) = rows[i][k];
    }
    return DataPanel(window, std::move(rates));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("panel JSON: ") + e.what());
  }
}

DataPanel load_panel(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open " + file.string());
  if (file.extension() == ".json") {
    try {
      return panel_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(file.string() + ": " + e.what());
    }
  }
  return read_panel_csv(in, file.string());
}

void save_panel(const DataPanel& panel, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write " + file.string());
  if (file.extension() == ".json") {
    out << panel_to_json(panel).dump(1) << '\n';
  } else {
    write_panel_csv(panel, out);
  }
}

namespace {
std::vector<double> toStd(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}
Eigen::VectorXd toEigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}
}  // namespace

nlohmann::json params_to_json(const StaticParams& params) {
  return {{"alpha", toStd(params.alpha)},
          {"beta", toStd(params.beta)},
          {"betaGamma", toStd(params.betaGamma)},
          {"theta", params.theta},
          {"eta", params.eta},
          {"lambda", params.lambda},
          {"sigma2Eps", params.sigma2Eps},
          {"sigma2Kappa", params.sigma2Kappa},
          {"sigma2Gamma", params.sigma2Gamma}};
}

StaticParams params_from_json(const nlohmann::json& j, const ModelSpec& spec) {
  StaticParams params;
  try {
    params.alpha = toEigen(j.at("alpha").get<std::vector<double>>());
    params.beta = toEigen(j.at("beta").get<std::vector<double>>());
    if (j.contains("betaGamma")) {
      params.betaGamma = toEigen(j.at("betaGamma").get<std::vector<double>>());
    }
    params.theta = j.at("theta").get<double>();
    params.sigma2Eps = j.at("sigma2Eps").get<double>();
    params.sigma2Kappa = j.at("sigma2Kappa").get<double>();
    if (spec.hasCohort()) {
      params.eta = j.at("eta").get<double>();
      params.lambda = j.at("lambda").get<double>();
      params.sigma2Gamma = j.at("sigma2Gamma").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("parameter JSON: ") + e.what());
  }
  const int p = spec.window.numAges();
  if (spec.kind == ModelKind::LeeCarter) params.betaGamma.resize(0);
  if (spec.kind == ModelKind::SimplifiedCohort &&
      params.betaGamma.size() == 0) {
    params.betaGamma = Eigen::VectorXd::Ones(p);
  }
  try {
    check_consistent(spec, params);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("parameter JSON: ") + e.what());
  }
  return params;
}

nlohmann::json truth_to_json(const SyntheticTruth& truth) {
  const auto n = truth.path.states.cols();
  std::vector<double> kappa(n);
  for (Eigen::Index t = 0; t < n; ++t) kappa[t] = truth.path.states(0, t);
  nlohmann::json j{{"model", std::string(to_string(truth.spec.kind))},
                   {"ages", truth.spec.window.ages()},
                   {"years", truth.spec.window.years()},
                   {"seed", truth.seed},
                   {"params", params_to_json(truth.params)},
                   {"kappa", kappa}};
  if (truth.spec.hasCohort()) {
    const auto series = extract_cohort_series(truth.path, truth.spec.window);
    j["firstCohort"] = series.firstCohort;
    j["cohorts"] = toStd(series.values);
    j["preWindowCohort"] = pre_window_cohort_value(truth.path);
  }
  return j;
}

}  // namespace mortality
