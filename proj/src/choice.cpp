#include "rabm/choice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "rabm/error.hpp"
#include "rabm/io.hpp"

namespace rabm {

Level classify(Attribute attribute, double v) {
  auto out_of_domain = [&]() {
    return ValidationError("value " + format_double(v) + " outside the domain of " +
                           std::string(to_string(attribute)));
  };
  if (!std::isfinite(v)) throw out_of_domain();
  switch (attribute) {
    case Attribute::price_discount:
      // [0,10) / [10,20] / (20,100]
      if (v < 0.0 || v > 100.0) throw out_of_domain();
      if (v < 10.0) return Level::L1;
      if (v <= 20.0) return Level::L2;
      return Level::L3;
    case Attribute::quality:
    case Attribute::assortment:
    case Attribute::service:
    case Attribute::emergency:
      // [0,0.4) / [0.4,0.7) / [0.7,1]
      if (v < 0.0 || v > 1.0) throw out_of_domain();
      if (v < 0.4) return Level::L1;
      if (v < 0.7) return Level::L2;
      return Level::L3;
    case Attribute::distance:
      // <= 2 / (2,10] / > 10
      if (v < 0.0) throw out_of_domain();
      if (v <= 2.0) return Level::L1;
      if (v <= 10.0) return Level::L2;
      return Level::L3;
  }
  throw out_of_domain();
}

double max_zero_sum_deviation(const PartWorthTable& table) {
  double worst = 0.0;
  for (const auto& levels : table.worth)
    worst = std::max(worst, std::abs(levels[0] + levels[1] + levels[2]));
  return worst;
}

PartWorthTable read_partworths(std::istream& in, std::string_view source) {
  const CsvTable csv = read_csv(in, source);
  const std::vector<std::string> expected{"emergency", "attribute", "level", "worth", "se"};
  if (csv.header != expected)
    throw ParseError(std::string(source) + ":1: header must be 'emergency,attribute,level,worth,se'");

  PartWorthTable table;
  std::array<std::array<bool, 3>, 5> seen{};
  bool first = true;
  for (const auto& row : csv.rows) {
    const std::string where = std::string(source) + ":" + std::to_string(row.line) + ": ";
    try {
      const Emergency e = parse_emergency(row.fields[0]);
      const Attribute a = parse_attribute(row.fields[1]);
      if (a == Attribute::emergency) throw ValidationError("emergency carries no part-worth");
      const Level l = parse_level(row.fields[2]);
      if (first) {
        table.emergency = e;
        first = false;
      } else if (e != table.emergency) {
        throw ValidationError("mixed emergency levels in one table");
      }
      auto& flag = seen[index_of(a)][index_of(l)];
      if (flag) throw ValidationError("duplicate attribute level");
      flag = true;
      table.worth[index_of(a)][index_of(l)] = parse_double(row.fields[3]);
      table.se[index_of(a)][index_of(l)] = parse_double(row.fields[4]);
    } catch (const ParseError& e) {
      throw ParseError(where + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  }
  for (auto a : kWorthAttributes)
    for (auto l : kLevels)
      if (!seen[index_of(a)][index_of(l)])
        throw ValidationError(std::string(source) + ": missing " + std::string(to_string(a)) +
                              " level " + std::to_string(index_of(l) + 1));
  return table;
}

PartWorthTable load_partworths(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_partworths(in, path.string());
}

PartWorthSet load_partworth_set(const std::filesystem::path& dir) {
  PartWorthSet set;
  for (auto e : kEmergencies) {
    std::string name(to_string(e));
    for (auto& ch : name) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    PartWorthTable t = load_partworths(dir / ("partworths_" + name + ".csv"));
    if (t.emergency != e)
      throw ValidationError("partworths_" + name + ".csv holds the wrong emergency level");
    set.tables[index_of(e)] = t;
  }
  return set;
}

std::array<double, 5> relative_importance(const PartWorthTable& table) {
  std::array<double, 5> ranges{};
  double total = 0.0;
  for (std::size_t a = 0; a < 5; ++a) {
    const auto& w = table.worth[a];
    ranges[a] = *std::max_element(w.begin(), w.end()) - *std::min_element(w.begin(), w.end());
    total += ranges[a];
  }
  std::array<double, 5> pct{};
  if (total <= 0.0) return pct;
  for (std::size_t a = 0; a < 5; ++a) pct[a] = 100.0 * ranges[a] / total;
  return pct;
}

double effective_distance(Channel channel, double km, const ChoiceParams& params) {
  if (channel == Channel::epharm) return std::max(km, params.epharm_min_distance_km);
  return std::max(km, params.min_distance_km);
}

Level distance_level(Channel channel, double effective_km) {
  if (channel == Channel::epharm) return Level::L3;
  return classify(Attribute::distance, effective_km);
}

double utility(double km, const RetailerProfile& r, const PartWorthTable& table,
               const ChoiceParams& params) {
  const double d = effective_distance(r.channel, km, params);
  const double sum = table.at(Attribute::price_discount, r.discount) +
                     table.at(Attribute::quality, r.quality) +
                     table.at(Attribute::assortment, r.assortment) +
                     table.at(Attribute::service, r.service) +
                     table.at(Attribute::distance, distance_level(r.channel, d));
  if (params.mobility_exponent == 0.0) return sum;
  return sum / std::pow(d, params.mobility_exponent);
}

ChoiceResult choose(std::span<const Candidate> candidates, const PartWorthTable& table,
                    const ChoiceParams& params) {
  if (candidates.empty()) throw ContractError("choose: no candidate retailers");
  ChoiceResult best;
  bool have = false;
  for (const auto& c : candidates) {
    const double u = utility(c.km, c.profile, table, params);
    const bool better =
        !have || u > best.utility ||
        (u == best.utility &&
         (index_of(c.profile.channel) < index_of(best.channel) ||
          (c.profile.channel == best.channel && c.retailer_id < best.retailer_id)));
    if (better) {
      best = {c.profile.channel, c.retailer_id, u};
      have = true;
    }
  }
  return best;
}

}  // namespace rabm
