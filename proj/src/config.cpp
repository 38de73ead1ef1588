#include "rabm/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <istream>

#include "rabm/error.hpp"
#include "rabm/io.hpp"

#ifndef RABM_DEFAULT_DATA_DIR
#define RABM_DEFAULT_DATA_DIR "data"
#endif

namespace rabm {

KeyValues parse_key_values(std::istream& in, std::string_view source) {
  KeyValues out;
  std::string line;
  long long number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string text{trim(line)};
    if (text.empty()) continue;
    const auto eq = text.find('=');
    const std::string where = std::string(source) + ":" + std::to_string(number) + ": ";
    if (eq == std::string::npos) throw ParseError(where + "expected key = value");
    std::string key{trim(std::string_view(text).substr(0, eq))};
    std::string value{trim(std::string_view(text).substr(eq + 1))};
    if (key.empty()) throw ParseError(where + "empty key");
    if (!out.emplace(key, value).second) throw ParseError(where + "duplicate key '" + key + "'");
  }
  return out;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("RETAIL_ABM_DATA"); env && *env) return env;
  return RABM_DEFAULT_DATA_DIR;
}

namespace {

const std::vector<std::string> kRequired = {
    "sites",
    "horizon_weeks",
    "seed",
    "mobility_exponent",
    "customers_per_agent",
    "unorganized.discount", "unorganized.quality", "unorganized.assortment", "unorganized.service",
    "organized.discount",   "organized.quality",   "organized.assortment",   "organized.service",
    "epharm.discount",      "epharm.quality",      "epharm.assortment",      "epharm.service",
};

// Optional keys and their defaults.
KeyValues defaults() {
  const TownParams t;
  const ChoiceParams c;
  const CalendarOptions cal;
  const Financials f;
  const DiscountScale d;
  const ScenarioConfig s;
  return {
      {"partworths_dir", ""},
      {"diseases", ""},
      {"town.households", std::to_string(t.households)},
      {"town.unorganized", std::to_string(t.unorganized)},
      {"town.organized", std::to_string(t.organized)},
      {"town.epharm", std::to_string(t.epharm)},
      {"town.extent_km", format_double(t.extent_km)},
      {"town.clusters", std::to_string(t.clusters)},
      {"town.store_spacing_iterations", std::to_string(t.store_spacing_iterations)},
      {"town.seed", std::to_string(t.seed)},
      {"town.origin_lat", format_double(t.origin_lat)},
      {"town.origin_lon", format_double(t.origin_lon)},
      {"min_distance_km", format_double(c.min_distance_km)},
      {"epharm_min_distance_km", format_double(c.epharm_min_distance_km)},
      {"base_mean_fraction", format_double(cal.base_mean_fraction)},
      {"seasonal_weight", format_double(cal.seasonal_weight)},
      {"annual_growth", format_double(cal.annual_growth)},
      {"order_size", format_double(f.order_size)},
      {"gross_margin_pct", format_double(f.gross_margin_pct)},
      {"monthly_cost", "12098"},
      {"weekly_min_profit", format_double(f.weekly_min_profit)},
      {"discount_low_pct", format_double(d.low)},
      {"discount_medium_pct", format_double(d.medium)},
      {"discount_high_pct", format_double(d.high)},
      {"review_window_weeks", std::to_string(s.review_window_weeks)},
      {"round_trip", "false"},
  };
}

class Reader {
 public:
  explicit Reader(const KeyValues& kv) : kv_(kv) {}

  const std::string& text(const std::string& key) const { return kv_.at(key); }

  double real(const std::string& key) const {
    try {
      return parse_double(text(key));
    } catch (const std::exception&) {
      throw ValidationError("config key '" + key + "': expected a number, got '" + text(key) + "'");
    }
  }

  long long integer(const std::string& key) const {
    try {
      return parse_int(text(key));
    } catch (const std::exception&) {
      throw ValidationError("config key '" + key + "': expected an integer, got '" + text(key) + "'");
    }
  }

  std::uint64_t seed(const std::string& key) const {
    const long long v = integer(key);
    if (v < 0) throw ValidationError("config key '" + key + "': seed must be non-negative");
    return static_cast<std::uint64_t>(v);
  }

  Level level(const std::string& key) const {
    try {
      return parse_level(text(key));
    } catch (const std::exception&) {
      throw ValidationError("config key '" + key + "': expected L, M or H, got '" + text(key) + "'");
    }
  }

  bool boolean(const std::string& key) const {
    const std::string& v = text(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ValidationError("config key '" + key + "': expected true or false, got '" + v + "'");
  }

 private:
  const KeyValues& kv_;
};

std::filesystem::path resolve_path(const std::string& value, const std::filesystem::path& base_dir) {
  std::filesystem::path p(value);
  return p.is_absolute() ? p : base_dir / p;
}

}  // namespace

const std::vector<std::string>& required_keys() { return kRequired; }

std::vector<std::filesystem::path> Setup::input_files() const {
  std::vector<std::filesystem::path> files;
  if (sites_file) files.push_back(*sites_file);
  for (const char* name : {"partworths_le.csv", "partworths_me.csv", "partworths_he.csv"})
    files.push_back(partworths_dir / name);
  files.push_back(diseases_file);
  return files;
}

Setup resolve_setup(const KeyValues& values, const std::filesystem::path& base_dir) {
  KeyValues all = defaults();
  for (const auto& key : kRequired)
    if (!values.contains(key)) throw ValidationError("missing config key '" + key + "'");
  for (const auto& [key, value] : values) {
    const bool known = all.contains(key) || std::find(kRequired.begin(), kRequired.end(), key) != kRequired.end();
    if (!known) throw ValidationError("unknown config key '" + key + "'");
    all[key] = value;
  }
  const Reader r(all);

  Setup s;
  s.resolved = all;
  const std::string& sites = r.text("sites");
  if (sites != "generate") s.sites_file = resolve_path(sites, base_dir);
  s.town.households = r.integer("town.households");
  s.town.unorganized = r.integer("town.unorganized");
  s.town.organized = r.integer("town.organized");
  s.town.epharm = r.integer("town.epharm");
  s.town.extent_km = r.real("town.extent_km");
  s.town.clusters = r.integer("town.clusters");
  s.town.store_spacing_iterations = r.integer("town.store_spacing_iterations");
  s.town.seed = r.seed("town.seed");
  s.town.origin_lat = r.real("town.origin_lat");
  s.town.origin_lon = r.real("town.origin_lon");

  const std::filesystem::path data = default_data_dir();
  s.partworths_dir = r.text("partworths_dir").empty() ? data : resolve_path(r.text("partworths_dir"), base_dir);
  s.diseases_file =
      r.text("diseases").empty() ? data / "diseases.csv" : resolve_path(r.text("diseases"), base_dir);

  s.calendar.base_mean_fraction = r.real("base_mean_fraction");
  s.calendar.seasonal_weight = r.real("seasonal_weight");
  s.calendar.annual_growth = r.real("annual_growth");

  ScenarioConfig& sc = s.scenario;
  const std::array<std::string, 3> prefix = {"unorganized.", "organized.", "epharm."};
  for (std::size_t c = 0; c < 3; ++c) {
    sc.attributes[c].discount = r.level(prefix[c] + "discount");
    sc.attributes[c].quality = r.level(prefix[c] + "quality");
    sc.attributes[c].assortment = r.level(prefix[c] + "assortment");
    sc.attributes[c].service = r.level(prefix[c] + "service");
  }
  sc.choice.mobility_exponent = r.real("mobility_exponent");
  sc.choice.min_distance_km = r.real("min_distance_km");
  sc.choice.epharm_min_distance_km = r.real("epharm_min_distance_km");
  if (!(sc.choice.mobility_exponent >= 0.0)) throw ValidationError("config key 'mobility_exponent' must be >= 0");
  if (!(sc.choice.min_distance_km > 0.0) || !(sc.choice.epharm_min_distance_km > 0.0))
    throw ValidationError("minimum distances must be positive");

  sc.financials.order_size = r.real("order_size");
  sc.financials.gross_margin_pct = r.real("gross_margin_pct");
  sc.financials.weekly_cost = r.real("monthly_cost") / kWeeksPerMonth;
  sc.financials.weekly_min_profit = r.real("weekly_min_profit");
  sc.discount_scale.low = r.real("discount_low_pct");
  sc.discount_scale.medium = r.real("discount_medium_pct");
  sc.discount_scale.high = r.real("discount_high_pct");
  sc.customers_per_agent = r.real("customers_per_agent");
  sc.horizon_weeks = r.integer("horizon_weeks");
  sc.review_window_weeks = r.integer("review_window_weeks");
  sc.round_trip = r.boolean("round_trip");
  sc.seed = r.seed("seed");
  if (sc.horizon_weeks < 1) throw ValidationError("config key 'horizon_weeks' must be at least 1");
  if (sc.review_window_weeks < 1) throw ValidationError("config key 'review_window_weeks' must be at least 1");
  if (!(sc.customers_per_agent > 0.0)) throw ValidationError("config key 'customers_per_agent' must be positive");

  sc.partworths = load_partworth_set(s.partworths_dir);
  const auto diseases = load_diseases(s.diseases_file);
  sc.calendar = build_calendar(diseases, static_cast<double>(std::max<long long>(s.town.households, 1)), s.calendar);
  return s;
}

Setup load_setup(const std::filesystem::path& path, const KeyValues& overrides) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  KeyValues kv = parse_key_values(in, path.string());
  for (const auto& [k, v] : overrides) kv[k] = v;
  return resolve_setup(kv, path.parent_path());
}

std::shared_ptr<const Town> build_town(Setup& setup) {
  auto sites = setup.sites_file ? load_sites(*setup.sites_file) : generate_town(setup.town);
  auto town = std::make_shared<const Town>(std::move(sites));
  if (town->household_count() > 0) {
    const auto diseases = load_diseases(setup.diseases_file);
    setup.scenario.calendar =
        build_calendar(diseases, static_cast<double>(town->household_count()), setup.calendar);
  }
  return town;
}

}  // namespace rabm
