#include "rabm/demand.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>

#include "rabm/choice.hpp"
#include "rabm/error.hpp"
#include "rabm/io.hpp"

namespace rabm {

namespace {

std::string lower(std::string_view text) {
  std::string out(trim(text));
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

bool parse_flag(std::string_view text) {
  const std::string t = lower(text);
  if (t == "yes" || t == "y" || t == "true" || t == "1") return true;
  if (t == "no" || t == "n" || t == "false" || t == "0") return false;
  throw ParseError("expected yes/no, found '" + std::string(text) + "'");
}

void add_range(std::vector<int>& weeks, int first, int last) {
  for (int w = first; w <= last; ++w) weeks.push_back(w);
}

}  // namespace

std::vector<DiseaseRow> read_diseases(std::istream& in, std::string_view source) {
  const CsvTable csv = read_csv(in, source);
  const std::vector<std::string> expected{"name", "cases_per_year", "seasonal", "peak_season"};
  if (csv.header != expected)
    throw ParseError(std::string(source) + ":1: header must be 'name,cases_per_year,seasonal,peak_season'");
  std::vector<DiseaseRow> rows;
  for (const auto& r : csv.rows) {
    const std::string where = std::string(source) + ":" + std::to_string(r.line) + ": ";
    try {
      DiseaseRow row{r.fields[0], parse_double(r.fields[1]), parse_flag(r.fields[2]), r.fields[3]};
      if (!(row.cases_per_year >= 0.0)) throw ValidationError("negative case count");
      if (row.seasonal) (void)season_weeks(row.peak_season);
      rows.push_back(std::move(row));
    } catch (const ParseError& e) {
      throw ParseError(where + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  }
  return rows;
}

std::vector<DiseaseRow> load_diseases(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_diseases(in, path.string());
}

std::vector<int> season_weeks(std::string_view season) {
  std::vector<int> weeks;
  std::string rest = lower(season);
  std::size_t start = 0;
  while (start <= rest.size()) {
    std::size_t cut = rest.find(" and ", start);
    const std::string part(trim(std::string_view(rest).substr(
        start, cut == std::string::npos ? std::string::npos : cut - start)));
    if (part == "rainy") {
      add_range(weeks, 23, 39);
    } else if (part == "winter") {
      add_range(weeks, 49, 52);
      add_range(weeks, 1, 8);
    } else if (part == "jan-march" || part == "jan-mar") {
      add_range(weeks, 1, 13);
    } else if (part == "jun-aug") {
      add_range(weeks, 23, 35);
    } else if (part == "summer") {
      add_range(weeks, 14, 22);
    } else {
      throw ValidationError("unknown season '" + std::string(season) + "'");
    }
    if (cut == std::string::npos) break;
    start = cut + 5;
  }
  std::sort(weeks.begin(), weeks.end());
  weeks.erase(std::unique(weeks.begin(), weeks.end()), weeks.end());
  return weeks;
}

std::array<double, kWeeksPerYear> weekly_cases(std::span<const DiseaseRow> rows,
                                               double seasonal_weight) {
  if (!(seasonal_weight > 0.0)) throw ValidationError("seasonal weight must be positive");
  std::array<double, kWeeksPerYear> cases{};
  for (const auto& row : rows) {
    if (!row.seasonal) {
      for (auto& c : cases) c += row.cases_per_year / kWeeksPerYear;
      continue;
    }
    std::array<double, kWeeksPerYear> weight;
    weight.fill(1.0);
    for (int w : season_weeks(row.peak_season)) weight[static_cast<std::size_t>(w - 1)] = seasonal_weight;
    const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
    for (std::size_t w = 0; w < cases.size(); ++w) cases[w] += row.cases_per_year * weight[w] / total;
  }
  return cases;
}

DemandCalendar build_calendar(std::span<const DiseaseRow> rows, double population,
                              const CalendarOptions& options) {
  if (!(population > 0.0)) throw ValidationError("population must be positive");
  if (!(options.base_mean_fraction > 0.0 && options.base_mean_fraction < 1.0))
    throw ValidationError("base mean fraction must lie in (0, 1)");
  if (!(options.annual_growth > -1.0)) throw ValidationError("annual growth must exceed -1");

  DemandCalendar cal;
  cal.annual_growth = options.annual_growth;
  const auto cases = weekly_cases(rows, options.seasonal_weight);
  // Only the shape of cases/population survives the rescale; population sets no level.
  std::array<double, kWeeksPerYear> raw{};
  for (std::size_t w = 0; w < raw.size(); ++w) raw[w] = cases[w] / population;
  const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / kWeeksPerYear;
  for (std::size_t w = 0; w < raw.size(); ++w) {
    const double f = mean > 0.0 ? raw[w] * options.base_mean_fraction / mean
                                : options.base_mean_fraction;
    cal.weekly_fraction[w] = std::min(f, 1.0);
  }
  return cal;
}

double demand_fraction(const DemandCalendar& calendar, long long week_index) {
  if (week_index < 0) throw ContractError("negative week index");
  const auto slot = static_cast<std::size_t>(week_index % kWeeksPerYear);
  const auto years = static_cast<double>(week_index / kWeeksPerYear);
  const double f = calendar.weekly_fraction[slot] * std::pow(1.0 + calendar.annual_growth, years);
  return std::min(f, 1.0);
}

std::vector<Activation> activate(std::size_t household_count, double fraction, Rng& rng) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw ContractError("activation fraction must lie in [0, 1]");
  std::vector<Activation> out;
  if (fraction == 0.0) return out;
  out.reserve(static_cast<std::size_t>(static_cast<double>(household_count) * fraction * 1.2) + 8);
  for (std::size_t h = 0; h < household_count; ++h) {
    if (!rng.bernoulli(fraction)) continue;
    const double beta = rng.uniform();
    out.push_back({h, {beta, emergency_of(classify(Attribute::emergency, beta))}});
  }
  return out;
}

}  // namespace rabm
