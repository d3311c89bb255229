#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mortality/diagnostics.hpp"
#include "mortality/forecast.hpp"

namespace mortality {

// Chain files.
//
// CSV: "# key: value" metadata lines (model, ages, years, seed, iterations,
// burnin, thin, draws, priors, cohort_variance_intercept), then one header row
// and one row per stored draw. Columns: draw index, the scalar parameters,
// alpha/beta/betaGamma per age, kappa for years t_1-1 .. t_n, and gamma for
// every cohort from the pre-window cohort (t_1-1-x_p) to t_n-x_1.
//
// JSON: {"meta": {...}, "columns": [...], "draws": [[...], ...]}.

std::vector<std::string> chain_columns(const ModelSpec& spec);
std::vector<double> flatten_draw(const Draw& draw, const ModelSpec& spec);
Draw unflatten_draw(std::span<const double> values, const ModelSpec& spec);

nlohmann::json chain_metadata(const PosteriorChain& chain);

void write_chain_csv(const PosteriorChain& chain, std::ostream& out);
PosteriorChain read_chain_csv(std::istream& in, const std::string& source);
nlohmann::json chain_to_json(const PosteriorChain& chain);
PosteriorChain chain_from_json(const nlohmann::json& j,
                               const std::string& source);

void save_chain(const PosteriorChain& chain, const std::filesystem::path& file);
PosteriorChain load_chain(const std::filesystem::path& file);

nlohmann::json hyperpriors_to_json(const Hyperpriors& priors);
Hyperpriors hyperpriors_from_json(const nlohmann::json& j);

// Reports.
void write_parameter_summary_csv(const std::vector<ParameterSummary>& rows,
                                 std::ostream& out);
void write_factor_summary_csv(const FactorSummary& summary, std::ostream& out);
// Columns: age, year, cohort, residual.
void write_residuals_csv(const ResidualGrid& grid, std::ostream& out);
nlohmann::json residuals_to_json(const ResidualGrid& grid);
nlohmann::json dic_to_json(const DicReport& report);
DicReport dic_from_json(const nlohmann::json& j);
// Columns: draw, year, age, logRate.
void write_forecast_draws_csv(const ForecastResult& result, std::ostream& out);
// Columns: year, age, mean, q02.5, q97.5.
void write_forecast_summary_csv(const ForecastResult& result,
                                const QuantileGrid& grid, std::ostream& out);
// Columns: factor, year, cohort, mean, q02.5, q97.5.
void write_factor_projection_csv(const FactorProjection& projection,
                                 std::ostream& out);

}  // namespace mortality
