// mortality: simulate, fit, diagnose, forecast and compare state-space
// mortality models from the command line.

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "mortality/chain_io.hpp"
#include "mortality/data_io.hpp"
#include "mortality/diagnostics.hpp"
#include "mortality/errors.hpp"
#include "mortality/forecast.hpp"

namespace fs = std::filesystem;
using namespace mortality;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

std::string sha256_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot read " + file.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int k = 0; k < len; ++k) {
    hex << std::hex << std::setw(2) << std::setfill('0') << int(md[k]);
  }
  return hex.str();
}

template <class Writer>
void write_file(const fs::path& file, Writer&& writer) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write " + file.string());
  writer(out);
  if (!out) throw DataError("write failed for " + file.string());
}

void write_json(const fs::path& file, const nlohmann::json& j) {
  write_file(file, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

nlohmann::json read_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open " + file.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError(file.string() + ": invalid JSON");
  return j;
}

fs::path resolve_out(const std::string& flag, const std::string& fallbackName) {
  if (!flag.empty()) return flag;
  const char* root = std::getenv("MORTALITY_OUT_ROOT");
  return fs::path(root && *root ? root : "runs") / fallbackName;
}

struct Manifest {
  nlohmann::json j;
  fs::path dir;
  std::vector<std::string> artifacts;

  Manifest(std::string command, const std::vector<std::string>& argv,
           fs::path outDir)
      : dir(std::move(outDir)) {
    j["command"] = std::move(command);
    j["argv"] = argv;
    j["output"] = dir.string();
  }

  void add(const std::string& name) { artifacts.push_back(name); }

  void write(const std::string& name = "manifest.json") {
    nlohmann::json sums = nlohmann::json::object();
    for (const auto& a : artifacts) sums[a] = sha256_file(dir / a);
    j["checksums"] = sums;
    write_json(dir / name, j);
  }
};

nlohmann::json window_json(const AgeYearWindow& w) {
  return {{"ages", std::to_string(w.firstAge()) + ":" + std::to_string(w.lastAge())},
          {"years", std::to_string(w.firstYear()) + ":" + std::to_string(w.lastYear())}};
}

// Parameters used by `simulate` when no file is given: a smooth log-rate
// schedule and loadings that sum to one.
StaticParams demo_params(const ModelSpec& spec) {
  const int p = spec.window.numAges();
  StaticParams s;
  s.alpha.resize(p);
  s.beta.resize(p);
  for (int i = 0; i < p; ++i) {
    s.alpha(i) = -4.5 + 0.09 * i;
    s.beta(i) = 1.0 + 0.5 * std::cos(3.0 * i / p);
  }
  s.beta /= s.beta.sum();
  s.theta = -0.3;
  s.sigma2Eps = 3e-4;
  s.sigma2Kappa = 0.5;
  if (spec.hasCohort()) {
    s.eta = -0.05;
    s.lambda = 0.8;
    s.sigma2Gamma = 0.2;
    s.betaGamma = Eigen::VectorXd::Ones(p);
    if (spec.kind == ModelKind::FullCohort) {
      for (int i = 0; i < p; ++i) s.betaGamma(i) = 1.5 - double(i) / p;
      s.betaGamma /= s.betaGamma.sum();
    }
  }
  return s;
}

// A fit directory holds chain.csv and panel.csv; a chain file may also be
// given directly, with the panel taken from its directory.
struct FitRun {
  fs::path dir;
  PosteriorChain chain;
  DataPanel panel;
};

FitRun load_fit(const fs::path& where) {
  FitRun run;
  fs::path chainFile = where;
  if (fs::is_directory(where)) {
    chainFile = where / "chain.csv";
    if (!fs::exists(chainFile)) chainFile = where / "chain.json";
  }
  if (!fs::exists(chainFile)) {
    throw DataError("no chain file found at " + where.string());
  }
  run.dir = chainFile.parent_path();
  run.chain = load_chain(chainFile);
  if (run.chain.draws.empty()) {
    throw DataError(chainFile.string() + ": chain holds no draws");
  }
  run.panel = load_panel(run.dir / "panel.csv");
  if (!(run.panel.window == run.chain.spec.window)) {
    throw DataError(run.dir.string() + ": panel window does not match chain");
  }
  return run;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string model = "full-cohort";
  std::string ages = "65:95";
  std::string years = "1970:2010";
  std::string params;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a, const std::vector<std::string>& argv) {
  const auto ages = parse_range(a.ages);
  const auto years = parse_range(a.years);
  ModelSpec spec{parse_model_kind(a.model),
                 AgeYearWindow(ages.first, ages.second, years.first, years.second)};
  StaticParams params = demo_params(spec);
  Eigen::VectorXd init = Eigen::VectorXd::Zero(spec.stateDim());
  if (!a.params.empty()) {
    const auto j = read_json(a.params);
    params = params_from_json(j, spec);
    if (j.contains("initialState")) {
      const auto v = j.at("initialState").get<std::vector<double>>();
      if (static_cast<int>(v.size()) != spec.stateDim()) {
        throw DataError(a.params + ": initialState must have " +
                        std::to_string(spec.stateDim()) + " entries");
      }
      init = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
    }
  }
  const SyntheticTruth truth = simulate_panel(spec, params, init, a.seed);

  const fs::path out = resolve_out(
      a.out, "simulate-" + std::string(to_string(spec.kind)) + "-seed" +
                 std::to_string(a.seed));
  fs::create_directories(out);
  Manifest manifest("simulate", argv, out);
  manifest.j["model"] = std::string(to_string(spec.kind));
  manifest.j["window"] = window_json(spec.window);
  manifest.j["seed"] = a.seed;
  manifest.j["inputs"] = {{"params", a.params}};
  manifest.j["initialState"] = std::vector<double>(init.data(), init.data() + init.size());

  save_panel(truth.panel, out / "panel.csv");
  manifest.add("panel.csv");
  save_panel(truth.panel, out / "panel.json");
  manifest.add("panel.json");
  write_json(out / "truth.json", truth_to_json(truth));
  manifest.add("truth.json");
  manifest.write();
  std::cout << "simulated " << spec.window.numAges() << "x"
            << spec.window.numYears() << " panel -> " << out.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string model = "full-cohort";
  std::string deaths, exposures, panel;
  std::string sex = "male";
  std::string ages = "65:95";
  std::string years = "1970:2010";
  int iters = 30000;
  int burnin = 15000;
  int thin = 1;
  std::uint64_t seed = 1;
  int chains = 1;
  std::string priors;
  bool literalCohortVariance = false;
  bool chainJson = false;
  bool quiet = false;
  std::string out;
};

void write_fit_outputs(const fs::path& out, const PosteriorChain& chain,
                       const DataPanel& panel, const FitArgs& a,
                       const std::vector<std::string>& argv, double seconds) {
  fs::create_directories(out);
  Manifest manifest("fit", argv, out);
  manifest.j["model"] = std::string(to_string(chain.spec.kind));
  manifest.j["window"] = window_json(chain.spec.window);
  manifest.j["sampler"] = chain_metadata(chain);
  manifest.j["seed"] = chain.config.seed;
  manifest.j["inputs"] = {{"deaths", a.deaths},
                          {"exposures", a.exposures},
                          {"panel", a.panel},
                          {"sex", a.sex},
                          {"priors", a.priors}};

  save_panel(panel, out / "panel.csv");
  manifest.add("panel.csv");
  save_chain(chain, out / "chain.csv");
  manifest.add("chain.csv");
  if (a.chainJson) {
    save_chain(chain, out / "chain.json");
    manifest.add("chain.json");
  }
  write_file(out / "summary.csv", [&](std::ostream& s) {
    write_parameter_summary_csv(summarize_parameters(chain), s);
  });
  manifest.add("summary.csv");
  write_file(out / "factors.csv", [&](std::ostream& s) {
    write_factor_summary_csv(summarize_factors(chain), s);
  });
  manifest.add("factors.csv");
  write_file(out / "run.log", [&](std::ostream& s) {
    s << "model " << to_string(chain.spec.kind) << "\nseed "
      << chain.config.seed << "\niterations " << chain.config.iterations
      << "\nstored draws " << chain.draws.size() << "\nseconds "
      << std::fixed << std::setprecision(2) << seconds << '\n';
  });
  manifest.write();
}

int cmd_fit(const FitArgs& a, const std::vector<std::string>& argv) {
  DataPanel panel;
  if (!a.panel.empty()) {
    if (!a.deaths.empty() || !a.exposures.empty()) {
      throw std::invalid_argument("--panel excludes --deaths/--exposures");
    }
    panel = load_panel(a.panel);
  } else {
    if (a.deaths.empty() || a.exposures.empty()) {
      throw std::invalid_argument(
          "fit needs --panel or both --deaths and --exposures");
    }
    const auto ages = parse_range(a.ages);
    const auto years = parse_range(a.years);
    const AgeYearWindow window(ages.first, ages.second, years.first,
                               years.second);
    panel = crude_rates(read_vital_table(a.deaths, TableKind::Deaths),
                        read_vital_table(a.exposures, TableKind::Exposures),
                        parse_sex(a.sex), window);
  }
  if (a.chains < 1) throw std::invalid_argument("--chains must be >= 1");

  ModelSpec spec{parse_model_kind(a.model), panel.window};
  SamplerConfig base;
  base.iterations = a.iters;
  base.burnIn = a.burnin;
  base.thin = a.thin;
  base.seed = a.seed;
  base.cohortVarianceUsesIntercept = !a.literalCohortVariance;
  if (!a.priors.empty()) base.priors = hyperpriors_from_json(read_json(a.priors));
  base.validate();

  const fs::path out = resolve_out(
      a.out, "fit-" + std::string(to_string(spec.kind)) + "-seed" +
                 std::to_string(a.seed));

  std::vector<std::exception_ptr> errors(a.chains);
  auto runOne = [&](int c) {
    try {
      SamplerConfig config = base;
      config.seed = base.seed + static_cast<std::uint64_t>(c);
      ProgressCallback progress;
      if (!a.quiet && a.chains == 1) {
        progress = [&](int it) {
          if (it % 1000 == 0) {
            std::cerr << "iteration " << it << "/" << config.iterations
                      << '\r' << std::flush;
          }
        };
      }
      const auto t0 = std::chrono::steady_clock::now();
      const PosteriorChain chain = run_chain(spec, panel, config, progress);
      const double secs = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
      const fs::path dir =
          a.chains == 1 ? out : out / ("chain-" + std::to_string(config.seed));
      write_fit_outputs(dir, chain, panel, a, argv, secs);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  if (a.chains == 1) {
    runOne(0);
  } else {
    std::vector<std::thread> pool;
    for (int c = 0; c < a.chains; ++c) pool.emplace_back(runOne, c);
    for (auto& t : pool) t.join();
  }
  if (!a.quiet && a.chains == 1) std::cerr << '\n';
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::cout << "fit " << to_string(spec.kind) << ": " << a.chains
            << " chain(s), " << base.storedDraws() << " draws each -> "
            << out.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct DiagnoseArgs {
  std::string chain;
  std::string out;
};

int cmd_diagnose(const DiagnoseArgs& a, const std::vector<std::string>& argv) {
  const FitRun run = load_fit(a.chain);
  const fs::path out = a.out.empty() ? run.dir : fs::path(a.out);
  fs::create_directories(out);
  const ResidualGrid residuals = compute_residuals(run.panel, run.chain);
  const DicReport dic = compute_dic(run.panel, run.chain);

  Manifest manifest("diagnose", argv, out);
  manifest.j["model"] = std::string(to_string(run.chain.spec.kind));
  manifest.j["window"] = window_json(run.chain.spec.window);
  manifest.j["inputs"] = {{"chain", a.chain}};
  write_file(out / "residuals.csv",
             [&](std::ostream& s) { write_residuals_csv(residuals, s); });
  manifest.add("residuals.csv");
  write_json(out / "dic.json", dic_to_json(dic));
  manifest.add("dic.json");
  manifest.write("manifest_diagnose.json");

  std::cout << std::setprecision(10) << "Dbar " << dic.meanDeviance
            << "\nD(mean) " << dic.devianceAtMean << "\npD " << dic.pD
            << "\nDIC " << dic.dic << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ForecastArgs {
  std::string chain;
  int horizon = 0;
  bool noPerDraw = false;
  std::string out;
};

int cmd_forecast(const ForecastArgs& a, const std::vector<std::string>& argv) {
  if (a.horizon < 1) throw std::invalid_argument("--horizon must be >= 1");
  const FitRun run = load_fit(a.chain);
  const fs::path out = a.out.empty() ? run.dir : fs::path(a.out);
  fs::create_directories(out);
  const ForecastResult result = forecast(run.chain, a.horizon);

  Manifest manifest("forecast", argv, out);
  manifest.j["model"] = std::string(to_string(run.chain.spec.kind));
  manifest.j["window"] = window_json(run.chain.spec.window);
  manifest.j["horizon"] = a.horizon;
  manifest.j["seed"] = run.chain.config.seed;
  manifest.j["inputs"] = {{"chain", a.chain}};
  if (!a.noPerDraw) {
    write_file(out / "forecast_draws.csv",
               [&](std::ostream& s) { write_forecast_draws_csv(result, s); });
    manifest.add("forecast_draws.csv");
  }
  write_file(out / "forecast_summary.csv", [&](std::ostream& s) {
    write_forecast_summary_csv(result, result.logRateSummary, s);
  });
  manifest.add("forecast_summary.csv");
  write_file(out / "forecast_rates.csv", [&](std::ostream& s) {
    write_forecast_summary_csv(result, result.rateSummary, s);
  });
  manifest.add("forecast_rates.csv");
  write_file(out / "factor_projection.csv", [&](std::ostream& s) {
    write_factor_projection_csv(project_factors(result), s);
  });
  manifest.add("factor_projection.csv");
  manifest.write("manifest_forecast.json");
  std::cout << "forecast " << result.window.numAges() << " ages x "
            << a.horizon << " years from " << result.logRates.size()
            << " draws -> " << out.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct CompareArgs {
  std::vector<std::string> chains;
  std::string out;
};

int cmd_compare(const CompareArgs& a, const std::vector<std::string>&) {
  struct Row {
    std::string source;
    std::string model;
    DicReport dic;
  };
  std::vector<Row> rows;
  for (const auto& c : a.chains) {
    const FitRun run = load_fit(c);
    rows.push_back({c, std::string(to_string(run.chain.spec.kind)),
                    compute_dic(run.panel, run.chain)});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) {
    return x.dic.dic < y.dic.dic;
  });
  auto emit = [&](std::ostream& s) {
    s << "rank,model,chain,Dbar,D_at_mean,pD,DIC\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto& d = rows[r].dic;
      s << r + 1 << ',' << rows[r].model << ',' << rows[r].source << ','
        << format_double(d.meanDeviance) << ','
        << format_double(d.devianceAtMean) << ',' << format_double(d.pD)
        << ',' << format_double(d.dic) << '\n';
    }
  };
  emit(std::cout);
  if (!a.out.empty()) write_file(a.out, emit);
  return kExitOk;
}

std::vector<std::string> args_of(int argc, char** argv) {
  return std::vector<std::string>(argv, argv + argc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian state-space mortality models"};
  app.require_subcommand(1);
  const auto allArgs = args_of(argc, argv);

  SimulateArgs sim;
  auto* simCmd = app.add_subcommand("simulate", "simulate a synthetic panel");
  simCmd->add_option("--model", sim.model, "lc | simplified-cohort | full-cohort")
      ->capture_default_str();
  simCmd->add_option("--ages", sim.ages, "age range a:b")->capture_default_str();
  simCmd->add_option("--years", sim.years, "year range a:b")->capture_default_str();
  simCmd->add_option("--params", sim.params, "parameter JSON file");
  simCmd->add_option("--seed", sim.seed)->capture_default_str();
  simCmd->add_option("--out", sim.out, "output directory");

  FitArgs fit;
  auto* fitCmd = app.add_subcommand("fit", "run the Gibbs sampler");
  fitCmd->add_option("--model", fit.model)->capture_default_str();
  fitCmd->add_option("--deaths", fit.deaths, "deaths table (period 1x1)");
  fitCmd->add_option("--exposures", fit.exposures, "exposure table (period 1x1)");
  fitCmd->add_option("--panel", fit.panel, "log-rate panel (.csv or .json)");
  fitCmd->add_option("--sex", fit.sex)->capture_default_str();
  fitCmd->add_option("--ages", fit.ages)->capture_default_str();
  fitCmd->add_option("--years", fit.years)->capture_default_str();
  fitCmd->add_option("--iters", fit.iters)->capture_default_str();
  fitCmd->add_option("--burnin", fit.burnin)->capture_default_str();
  fitCmd->add_option("--thin", fit.thin)->capture_default_str();
  fitCmd->add_option("--seed", fit.seed)->capture_default_str();
  fitCmd->add_option("--chains", fit.chains, "independent chains, seeds S..S+N-1")
      ->capture_default_str();
  fitCmd->add_option("--priors", fit.priors, "hyperprior JSON file");
  fitCmd->add_flag("--literal-cohort-variance", fit.literalCohortVariance,
                   "omit eta from the sigma2Gamma residuals");
  fitCmd->add_flag("--chain-json", fit.chainJson, "also write chain.json");
  fitCmd->add_flag("--quiet", fit.quiet);
  fitCmd->add_option("--out", fit.out, "output directory");

  DiagnoseArgs diag;
  auto* diagCmd = app.add_subcommand("diagnose", "residuals and DIC of a fit");
  diagCmd->add_option("--chain", diag.chain, "fit directory or chain file")
      ->required();
  diagCmd->add_option("--out", diag.out);

  ForecastArgs fc;
  auto* fcCmd = app.add_subcommand("forecast", "posterior predictive forecast");
  fcCmd->add_option("--chain", fc.chain, "fit directory or chain file")->required();
  fcCmd->add_option("--horizon", fc.horizon, "years ahead")->required();
  fcCmd->add_flag("--no-per-draw", fc.noPerDraw, "skip forecast_draws.csv");
  fcCmd->add_option("--out", fc.out);

  CompareArgs cmp;
  auto* cmpCmd = app.add_subcommand("compare", "rank fits by DIC");
  cmpCmd->add_option("--chain", cmp.chains, "fit directories")->required();
  cmpCmd->add_option("--out", cmp.out, "CSV file for the table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simCmd) return cmd_simulate(sim, allArgs);
    if (*fitCmd) return cmd_fit(fit, allArgs);
    if (*diagCmd) return cmd_diagnose(diag, allArgs);
    if (*fcCmd) return cmd_forecast(fc, allArgs);
    if (*cmpCmd) return cmd_compare(cmp, allArgs);
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}
