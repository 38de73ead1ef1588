#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rabm/rng.hpp"
#include "rabm/types.hpp"

namespace rabm {

inline constexpr int kWeeksPerYear = 52;

struct DiseaseRow {
  std::string name;
  double cases_per_year = 0.0;
  bool seasonal = false;
  std::string peak_season;
};

/// Reads `name,cases_per_year,seasonal,peak_season`.
std::vector<DiseaseRow> read_diseases(std::istream& in, std::string_view source);
std::vector<DiseaseRow> load_diseases(const std::filesystem::path& path);

/// 1-based calendar weeks of a named season:
///   rainy 23-39, winter 49-52 and 1-8, jan-march 1-13, jun-aug 23-35, summer 14-22.
/// "X and Y" is the union. Unknown names throw ValidationError.
std::vector<int> season_weeks(std::string_view season);

struct CalendarOptions {
  double base_mean_fraction = 0.03;
  double seasonal_weight = 2.0;
  double annual_growth = 0.096;
};

/// Fraction of households with demand in each calendar week, plus the yearly growth.
struct DemandCalendar {
  std::array<double, kWeeksPerYear> weekly_fraction{};
  double annual_growth = 0.096;
};

/// Weekly case counts before rescaling: non-seasonal cases spread evenly, seasonal
/// cases spread with `seasonal_weight` times the mass on each in-season week.
std::array<double, kWeeksPerYear> weekly_cases(std::span<const DiseaseRow> rows,
                                               double seasonal_weight);

/// Rescales the weekly case shape so its mean is `base_mean_fraction` (values capped
/// at 1). All-zero cases give a flat calendar.
DemandCalendar build_calendar(std::span<const DiseaseRow> rows, double population,
                              const CalendarOptions& options);

/// weekly_fraction[week mod 52] * (1 + growth)^(week / 52), capped at 1.
double demand_fraction(const DemandCalendar& calendar, long long week_index);

struct EmergencyDraw {
  double beta = 0.0;
  Emergency level = Emergency::low;
};

struct Activation {
  std::size_t household = 0;  // index into the household list passed to activate()
  EmergencyDraw draw;
};

/// Roulette-wheel activation: every household independently has demand with
/// probability `fraction`; each one that does draws beta ~ U[0,1].
/// Output is in household order.
std::vector<Activation> activate(std::size_t household_count, double fraction, Rng& rng);

}  // namespace rabm
