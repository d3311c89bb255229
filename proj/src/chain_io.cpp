#include "mortality/chain_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "mortality/data_io.hpp"
#include "mortality/errors.hpp"

namespace mortality {

namespace {

std::string rangeText(int a, int b) {
  return std::to_string(a) + ":" + std::to_string(b);
}

}  // namespace

std::vector<std::string> chain_columns(const ModelSpec& spec) {
  const auto& w = spec.window;
  std::vector<std::string> cols = scalar_parameter_names(spec.kind);
  for (int i = 0; i < w.numAges(); ++i) {
    cols.push_back("alpha[" + std::to_string(w.age(i)) + "]");
  }
  for (int i = 0; i < w.numAges(); ++i) {
    cols.push_back("beta[" + std::to_string(w.age(i)) + "]");
  }
  if (spec.kind == ModelKind::FullCohort) {
    for (int i = 0; i < w.numAges(); ++i) {
      cols.push_back("betaGamma[" + std::to_string(w.age(i)) + "]");
    }
  }
  for (int y = w.firstYear() - 1; y <= w.lastYear(); ++y) {
    cols.push_back("kappa[" + std::to_string(y) + "]");
  }
  if (spec.hasCohort()) {
    for (int c = w.firstCohort() - 1; c <= w.lastCohort(); ++c) {
      cols.push_back("gamma[" + std::to_string(c) + "]");
    }
  }
  return cols;
}

std::vector<double> flatten_draw(const Draw& draw, const ModelSpec& spec) {
  std::vector<double> v;
  for (const auto& name : scalar_parameter_names(spec.kind)) {
    v.push_back(scalar_parameter(draw.params, name));
  }
  auto append = [&](const Eigen::VectorXd& x) {
    v.insert(v.end(), x.data(), x.data() + x.size());
  };
  append(draw.params.alpha);
  append(draw.params.beta);
  if (spec.kind == ModelKind::FullCohort) append(draw.params.betaGamma);
  append(draw.path.states.row(0).transpose());
  if (spec.hasCohort()) {
    v.push_back(pre_window_cohort_value(draw.path));
    append(extract_cohort_series(draw.path, spec.window).values);
  }
  return v;
}

Draw unflatten_draw(std::span<const double> values, const ModelSpec& spec) {
  const int p = spec.window.numAges();
  const int n = spec.window.numYears();
  const auto names = scalar_parameter_names(spec.kind);
  std::size_t expected = names.size() + 2 * p + (n + 1);
  if (spec.kind == ModelKind::FullCohort) expected += p;
  if (spec.hasCohort()) expected += n + p;
  if (values.size() != expected) {
    throw DataError("draw has " + std::to_string(values.size()) +
                    " values, expected " + std::to_string(expected));
  }
  std::size_t pos = 0;
  auto take = [&](Eigen::Index count) {
    Eigen::VectorXd out = Eigen::Map<const Eigen::VectorXd>(values.data() + pos, count);
    pos += count;
    return out;
  };
  Draw d;
  for (const auto& name : names) {
    const double v = values[pos++];
    if (name == "theta") d.params.theta = v;
    else if (name == "eta") d.params.eta = v;
    else if (name == "lambda") d.params.lambda = v;
    else if (name == "sigma2Eps") d.params.sigma2Eps = v;
    else if (name == "sigma2Kappa") d.params.sigma2Kappa = v;
    else if (name == "sigma2Gamma") d.params.sigma2Gamma = v;
  }
  d.params.alpha = take(p);
  d.params.beta = take(p);
  switch (spec.kind) {
    case ModelKind::LeeCarter:
      break;
    case ModelKind::SimplifiedCohort:
      d.params.betaGamma = Eigen::VectorXd::Ones(p);
      break;
    case ModelKind::FullCohort:
      d.params.betaGamma = take(p);
      break;
  }
  const Eigen::VectorXd kappa = take(n + 1);
  Eigen::VectorXd cohorts;
  if (spec.hasCohort()) cohorts = take(n + p);
  d.path = path_from_factors(spec, kappa, cohorts);
  return d;
}

nlohmann::json hyperpriors_to_json(const Hyperpriors& priors) {
  auto g = [](const GaussianPrior& p) {
    return nlohmann::json{{"mean", p.mean}, {"variance", p.variance}};
  };
  auto ig = [](const InverseGammaPrior& p) {
    return nlohmann::json{{"shape", p.shape}, {"scale", p.scale}};
  };
  return {{"alpha", g(priors.alpha)},
          {"beta", g(priors.beta)},
          {"betaGamma", g(priors.betaGamma)},
          {"theta", g(priors.theta)},
          {"eta", g(priors.eta)},
          {"lambda", g(priors.lambda)},
          {"sigma2Eps", ig(priors.sigma2Eps)},
          {"sigma2Kappa", ig(priors.sigma2Kappa)},
          {"sigma2Gamma", ig(priors.sigma2Gamma)},
          {"initMean", priors.initMean},
          {"initVariance", priors.initVariance}};
}

Hyperpriors hyperpriors_from_json(const nlohmann::json& j) {
  Hyperpriors h;
  auto g = [&](const char* key, GaussianPrior& out) {
    if (!j.contains(key)) return;
    out.mean = j.at(key).value("mean", out.mean);
    out.variance = j.at(key).value("variance", out.variance);
  };
  auto ig = [&](const char* key, InverseGammaPrior& out) {
    if (!j.contains(key)) return;
    out.shape = j.at(key).value("shape", out.shape);
    out.scale = j.at(key).value("scale", out.scale);
  };
  g("alpha", h.alpha);
  g("beta", h.beta);
  g("betaGamma", h.betaGamma);
  g("theta", h.theta);
  g("eta", h.eta);
  g("lambda", h.lambda);
  ig("sigma2Eps", h.sigma2Eps);
  ig("sigma2Kappa", h.sigma2Kappa);
  ig("sigma2Gamma", h.sigma2Gamma);
  h.initMean = j.value("initMean", h.initMean);
  h.initVariance = j.value("initVariance", h.initVariance);
  h.validate();
  return h;
}

nlohmann::json chain_metadata(const PosteriorChain& chain) {
  const auto& w = chain.spec.window;
  const auto& c = chain.config;
  return {{"format", "mortality-chain/1"},
          {"model", std::string(to_string(chain.spec.kind))},
          {"ages", rangeText(w.firstAge(), w.lastAge())},
          {"years", rangeText(w.firstYear(), w.lastYear())},
          {"seed", c.seed},
          {"iterations", c.iterations},
          {"burnin", c.burnIn},
          {"thin", c.thin},
          {"draws", chain.draws.size()},
          {"cohort_variance_intercept", c.cohortVarianceUsesIntercept},
          {"priors", hyperpriors_to_json(c.priors)}};
}

namespace {

struct ChainHeader {
  ModelSpec spec;
  SamplerConfig config;
  std::size_t draws = 0;
};

ChainHeader headerFromMetadata(const nlohmann::json& meta,
                               const std::string& source) {
  try {
    ChainHeader h;
    h.spec.kind = parse_model_kind(meta.at("model").get<std::string>());
    const auto ages = parse_range(meta.at("ages").get<std::string>());
    const auto years = parse_range(meta.at("years").get<std::string>());
    h.spec.window =
        AgeYearWindow(ages.first, ages.second, years.first, years.second);
    h.config.seed = meta.at("seed").get<std::uint64_t>();
    h.config.iterations = meta.at("iterations").get<int>();
    h.config.burnIn = meta.at("burnin").get<int>();
    h.config.thin = meta.at("thin").get<int>();
    h.config.cohortVarianceUsesIntercept =
        meta.value("cohort_variance_intercept", true);
    if (meta.contains("priors")) {
      h.config.priors = hyperpriors_from_json(meta.at("priors"));
    }
    h.draws = meta.at("draws").get<std::size_t>();
    return h;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(source + ": bad chain metadata: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(source + ": bad chain metadata: " + e.what());
  }
}

}  // namespace

void write_chain_csv(const PosteriorChain& chain, std::ostream& out) {
  const auto meta = chain_metadata(chain);
  for (const auto& [key, value] : meta.items()) {
    out << "# " << key << ": "
        << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
  }
  out << "draw";
  for (const auto& c : chain_columns(chain.spec)) out << ',' << c;
  out << '\n';
  for (std::size_t l = 0; l < chain.draws.size(); ++l) {
    out << l;
    for (double v : flatten_draw(chain.draws[l], chain.spec)) {
      out << ',' << format_double(v);
    }
    out << '\n';
  }
}

PosteriorChain read_chain_csv(std::istream& in, const std::string& source) {
  nlohmann::json meta = nlohmann::json::object();
  std::string line;
  int lineNo = 0;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto colon = line.find(": ");
      if (colon == std::string::npos) continue;
      const std::string key = line.substr(2, colon - 2);
      const std::string value = line.substr(colon + 2);
      auto parsed = nlohmann::json::parse(value, nullptr, false);
      meta[key] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (columns.empty()) {
      columns = std::move(fields);
      continue;
    }
    if (fields.size() != columns.size()) {
      throw DataError(source + ":" + std::to_string(lineNo) +
                      ": truncated or corrupt chain row (" +
                      std::to_string(fields.size()) + " of " +
                      std::to_string(columns.size()) + " fields)");
    }
    std::vector<double> row(fields.size() - 1);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      auto [ptr, ec] = std::from_chars(
          fields[k].data(), fields[k].data() + fields[k].size(), row[k - 1]);
      if (ec != std::errc() || ptr != fields[k].data() + fields[k].size()) {
        throw DataError(source + ":" + std::to_string(lineNo) +
                        ": bad number '" + fields[k] + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (columns.empty()) throw DataError(source + ": no chain header found");
  const ChainHeader header = headerFromMetadata(meta, source);
  std::vector<std::string> expected{"draw"};
  for (auto& c : chain_columns(header.spec)) expected.push_back(c);
  if (columns != expected) {
    throw DataError(source + ": chain columns do not match the metadata");
  }
  if (rows.size() != header.draws) {
    throw DataError(source + ": truncated chain file: expected " +
                    std::to_string(header.draws) + " draws, found " +
                    std::to_string(rows.size()));
  }
  PosteriorChain chain{header.spec, header.config, {}};
  chain.draws.reserve(rows.size());
  for (const auto& row : rows) {
    chain.draws.push_back(unflatten_draw(row, header.spec));
  }
  return chain;
}

nlohmann::json chain_to_json(const PosteriorChain& chain) {
  nlohmann::json draws = nlohmann::json::array();
  for (const auto& d : chain.draws) draws.push_back(flatten_draw(d, chain.spec));
  return {{"meta", chain_metadata(chain)},
          {"columns", chain_columns(chain.spec)},
          {"draws", std::move(draws)}};
}

PosteriorChain chain_from_json(const nlohmann::json& j,
                               const std::string& source) {
  try {
    const ChainHeader header = headerFromMetadata(j.at("meta"), source);
    if (j.at("columns").get<std::vector<std::string>>() !=
        chain_columns(header.spec)) {
      throw DataError(source + ": chain columns do not match the metadata");
    }
    const auto& draws = j.at("draws");
    if (draws.size() != header.draws) {
      throw DataError(source + ": truncated chain file: expected " +
                      std::to_string(header.draws) + " draws, found " +
                      std::to_string(draws.size()));
    }
    PosteriorChain chain{header.spec, header.config, {}};
    for (const auto& row : draws) {
      chain.draws.push_back(
          unflatten_draw(row.get<std::vector<double>>(), header.spec));
    }
    return chain;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(source + ": " + e.what());
  }
}

void save_chain(const PosteriorChain& chain, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write " + file.string());
  if (file.extension() == ".json") {
    out << chain_to_json(chain).dump() << '\n';
  } else {
    write_chain_csv(chain, out);
  }
}

PosteriorChain load_chain(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open chain file " + file.string());
  if (file.extension() == ".json") {
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) {
      throw DataError(file.string() + ": corrupt chain JSON");
    }
    return chain_from_json(j, file.string());
  }
  return read_chain_csv(in, file.string());
}

void write_parameter_summary_csv(const std::vector<ParameterSummary>& rows,
                                 std::ostream& out) {
  out << "parameter,mean,q02.5,q97.5\n";
  for (const auto& r : rows) {
    out << r.name << ',' << format_double(r.stats.mean) << ','
        << format_double(r.stats.lower) << ',' << format_double(r.stats.upper)
        << '\n';
  }
}

void write_factor_summary_csv(const FactorSummary& summary, std::ostream& out) {
  out << "factor,index,mean,q02.5,q97.5\n";
  auto emit = [&](const char* name, const std::vector<int>& idx,
                  const std::vector<IntervalSummary>& s) {
    for (std::size_t k = 0; k < idx.size(); ++k) {
      out << name << ',' << idx[k] << ',' << format_double(s[k].mean) << ','
          << format_double(s[k].lower) << ',' << format_double(s[k].upper)
          << '\n';
    }
  };
  emit("kappa", summary.periods, summary.kappa);
  emit("gamma", summary.cohorts, summary.gamma);
}

void write_residuals_csv(const ResidualGrid& grid, std::ostream& out) {
  out << "age,year,cohort,residual\n";
  for (int i = 0; i < grid.window.numAges(); ++i) {
    for (int j = 0; j < grid.window.numYears(); ++j) {
      const int age = grid.window.age(i);
      const int year = grid.window.year(j);
      out << age << ',' << year << ',' << year - age << ','
          << format_double(grid.residuals(i, j)) << '\n';
    }
  }
}

nlohmann::json residuals_to_json(const ResidualGrid& grid) {
  return panel_to_json(DataPanel(grid.window, grid.residuals));
}

nlohmann::json dic_to_json(const DicReport& r) {
  return {{"meanDeviance", r.meanDeviance},
          {"devianceAtMean", r.devianceAtMean},
          {"pD", r.pD},
          {"dic", r.dic}};
}

DicReport dic_from_json(const nlohmann::json& j) {
  try {
    DicReport r;
    r.meanDeviance = j.at("meanDeviance").get<double>();
    r.devianceAtMean = j.at("devianceAtMean").get<double>();
    r.pD = j.at("pD").get<double>();
    r.dic = j.at("dic").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("DIC report: ") + e.what());
  }
}

void write_forecast_draws_csv(const ForecastResult& result, std::ostream& out) {
  out << "draw,year,age,logRate\n";
  for (std::size_t l = 0; l < result.logRates.size(); ++l) {
    const auto& y = result.logRates[l];
    for (int j = 0; j < result.horizon; ++j) {
      for (int i = 0; i < result.window.numAges(); ++i) {
        out << l << ',' << result.forecastYear(j) << ',' << result.window.age(i)
            << ',' << format_double(y(i, j)) << '\n';
      }
    }
  }
}

void write_forecast_summary_csv(const ForecastResult& result,
                                const QuantileGrid& grid, std::ostream& out) {
  out << "year,age,mean,q02.5,q97.5\n";
  for (int j = 0; j < result.horizon; ++j) {
    for (int i = 0; i < result.window.numAges(); ++i) {
      out << result.forecastYear(j) << ',' << result.window.age(i) << ','
          << format_double(grid.mean(i, j)) << ','
          << format_double(grid.lower(i, j)) << ','
          << format_double(grid.upper(i, j)) << '\n';
    }
  }
}

void write_factor_projection_csv(const FactorProjection& projection,
                                 std::ostream& out) {
  out << "factor,year,cohort,mean,q02.5,q97.5\n";
  for (std::size_t k = 0; k < projection.years.size(); ++k) {
    const auto& s = projection.kappa[k];
    out << "kappa," << projection.years[k] << ",," << format_double(s.mean)
        << ',' << format_double(s.lower) << ',' << format_double(s.upper)
        << '\n';
  }
  for (std::size_t k = 0; k < projection.cohorts.size(); ++k) {
    const auto& s = projection.gamma[k];
    out << "gamma," << projection.years[k] << ',' << projection.cohorts[k]
        << ',' << format_double(s.mean) << ',' << format_double(s.lower) << ','
        << format_double(s.upper) << '\n';
  }
}

}  // namespace mortality
