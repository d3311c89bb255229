#pragma once

#include <span>
#include <string>
#include <vector>

namespace mortality {

/// Contiguous age-by-year observation window with unit spacing on both axes.
///
/// Ages x_1..x_p index rows of a panel and calendar years t_1..t_n index its
/// columns. Birth-year cohorts c = t - x run from t_1 - x_p to t_n - x_1,
/// which gives n + p - 1 distinct cohorts.
class AgeYearWindow {
 public:
  AgeYearWindow() = default;
  AgeYearWindow(int firstAge, int lastAge, int firstYear, int lastYear);

  // Validates that both lists are strictly increasing with unit steps.
  static AgeYearWindow fromLists(std::span<const int> ages,
                                 std::span<const int> years);

  int firstAge() const { return firstAge_; }
  int lastAge() const { return lastAge_; }
  int firstYear() const { return firstYear_; }
  int lastYear() const { return lastYear_; }

  int numAges() const { return lastAge_ - firstAge_ + 1; }
  int numYears() const { return lastYear_ - firstYear_ + 1; }
  int numCohorts() const { return numYears() + numAges() - 1; }

  int firstCohort() const { return firstYear_ - lastAge_; }
  int lastCohort() const { return lastYear_ - firstAge_; }

  int age(int i) const { return firstAge_ + i; }
  int year(int j) const { return firstYear_ + j; }

  bool containsAge(int a) const { return a >= firstAge_ && a <= lastAge_; }
  bool containsYear(int y) const { return y >= firstYear_ && y <= lastYear_; }

  std::vector<int> ages() const;
  std::vector<int> years() const;

  bool operator==(const AgeYearWindow&) const = default;

 private:
  int firstAge_ = 0;
  int lastAge_ = 1;
  int firstYear_ = 0;
  int lastYear_ = 1;
};

/// Year of birth of the cell (age, year). Throws std::out_of_range if the cell
/// lies outside the window.
int cohort_index(const AgeYearWindow& window, int age, int year);

/// Year of birth for an in-window age at a year beyond the window (forecasts).
int projected_cohort_index(const AgeYearWindow& window, int age, int year);

// Parses "a:b" into an inclusive integer range.
std::pair<int, int> parse_range(const std::string& text);

}  // namespace mortality
