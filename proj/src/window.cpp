#include "mortality/window.hpp"

#include <charconv>
#include <stdexcept>

#include "mortality/errors.hpp"

namespace mortality {

AgeYearWindow::AgeYearWindow(int firstAge, int lastAge, int firstYear,
                             int lastYear)
    : firstAge_(firstAge),
      lastAge_(lastAge),
      firstYear_(firstYear),
      lastYear_(lastYear) {
  if (lastAge - firstAge < 1) {
    throw DataError("window needs at least two ages, got " +
                    std::to_string(firstAge) + ":" + std::to_string(lastAge));
  }
  if (lastYear - firstYear < 1) {
    throw DataError("window needs at least two years, got " +
                    std::to_string(firstYear) + ":" +
                    std::to_string(lastYear));
  }
}

namespace {
void requireContiguous(std::span<const int> values, const char* what) {
  if (values.size() < 2) {
    throw DataError(std::string("need at least two ") + what);
  }
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] != values[i - 1] + 1) {
      throw DataError(std::string(what) +
                      " must be contiguous with unit spacing (break after " +
                      std::to_string(values[i - 1]) + ")");
    }
  }
}
}  // namespace

AgeYearWindow AgeYearWindow::fromLists(std::span<const int> ages,
                                       std::span<const int> years) {
  requireContiguous(ages, "ages");
  requireContiguous(years, "years");
  return AgeYearWindow(ages.front(), ages.back(), years.front(), years.back());
}

std::vector<int> AgeYearWindow::ages() const {
  std::vector<int> out(numAges());
  for (int i = 0; i < numAges(); ++i) out[i] = age(i);
  return out;
}

std::vector<int> AgeYearWindow::years() const {
  std::vector<int> out(numYears());
  for (int j = 0; j < numYears(); ++j) out[j] = year(j);
  return out;
}

int cohort_index(const AgeYearWindow& window, int age, int year) {
  if (!window.containsAge(age) || !window.containsYear(year)) {
    throw std::out_of_range("cell (age " + std::to_string(age) + ", year " +
                            std::to_string(year) + ") is outside the window");
  }
  return year - age;
}

int projected_cohort_index(const AgeYearWindow& window, int age, int year) {
  if (!window.containsAge(age) || year <= window.lastYear()) {
    throw std::out_of_range("projected cell (age " + std::to_string(age) +
                            ", year " + std::to_string(year) +
                            ") is not beyond the window");
  }
  return year - age;
}

std::pair<int, int> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw std::invalid_argument("range '" + text + "' must look like a:b");
  }
  auto parseInt = [&](std::string_view part) {
    int value = 0;
    auto [ptr, ec] =
        std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc() || ptr != part.data() + part.size()) {
      throw std::invalid_argument("range '" + text + "' is not integral");
    }
    return value;
  };
  std::string_view view(text);
  return {parseInt(view.substr(0, colon)), parseInt(view.substr(colon + 1))};
}

}  // namespace mortality
