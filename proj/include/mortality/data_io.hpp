#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mortality/model.hpp"

namespace mortality {

enum class Sex { Female, Male, Total };
Sex parse_sex(const std::string& name);

enum class TableKind { Deaths, Exposures, Unknown };

struct VitalRow {
  int year = 0;
  int age = 0;
  bool openAge = false;  // "110+" style rows; `age` holds the lower bound
  double female = 0.0;
  double male = 0.0;
  double total = 0.0;

  double value(Sex sex) const;
};

/// Period 1x1 table (Year, Age, Female, Male, Total). Missing entries ('.')
/// are stored as NaN.
struct RawVitalTable {
  TableKind kind = TableKind::Unknown;
  std::string source;
  std::vector<VitalRow> rows;

  const VitalRow* find(int year, int age) const;
};

/// Accepts the whitespace-aligned text layout (optional title lines, then a
/// header starting with "Year") and the comma-separated equivalent.
RawVitalTable parse_vital_table(std::istream& in, const std::string& source,
                                TableKind kind = TableKind::Unknown);
RawVitalTable read_vital_table(const std::filesystem::path& file,
                               TableKind kind = TableKind::Unknown);

/// Log crude death rates ln(D / E) over the window. Cells with missing data,
/// zero exposure or zero deaths are rejected with a DataError naming them.
DataPanel crude_rates(const RawVitalTable& deaths,
                      const RawVitalTable& exposures, Sex sex,
                      const AgeYearWindow& window);

// One-year death probability from the force of mortality: q = 1 - exp(-m).
double death_probability(double centralRate);
// Initial exposure approximated from central exposure: E + D / 2.
double initial_exposure(double centralExposure, double deaths);

struct SyntheticTruth {
  ModelSpec spec;
  StaticParams params;
  StatePath path;
  DataPanel panel;
  std::uint64_t seed = 0;
};

/// Simulates phi_{1:n} forward from `initialState` and y_{1:n} from the
/// observation equation. Zero variances give a deterministic panel.
SyntheticTruth simulate_panel(const ModelSpec& spec, const StaticParams& params,
                              const Eigen::VectorXd& initialState,
                              std::uint64_t seed);

// Panel files: CSV with an "age" header column followed by one column per
// year, and JSON {"ages", "years", "logRates"}.
void write_panel_csv(const DataPanel& panel, std::ostream& out);
DataPanel read_panel_csv(std::istream& in, const std::string& source);
nlohmann::json panel_to_json(const DataPanel& panel);
DataPanel panel_from_json(const nlohmann::json& j);

DataPanel load_panel(const std::filesystem::path& file);
void save_panel(const DataPanel& panel, const std::filesystem::path& file);

nlohmann::json params_to_json(const StaticParams& params);
StaticParams params_from_json(const nlohmann::json& j, const ModelSpec& spec);

nlohmann::json truth_to_json(const SyntheticTruth& truth);

// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace mortality
