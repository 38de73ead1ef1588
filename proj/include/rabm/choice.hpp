#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>

#include "rabm/types.hpp"

namespace rabm {

/// Bins a raw attribute value into its level. Domains: discount in [0, 100] percent;
/// quality, assortment, service and emergency in [0, 1]; distance >= 0 km.
/// Throws ValidationError outside the domain.
Level classify(Attribute attribute, double raw_value);

/// Effects-coded part-worths for one emergency bucket, indexed [attribute][level]
/// over the five worth attributes.
struct PartWorthTable {
  Emergency emergency = Emergency::high;
  std::array<std::array<double, 3>, 5> worth{};
  std::array<std::array<double, 3>, 5> se{};

  double at(Attribute a, Level l) const { return worth[index_of(a)][index_of(l)]; }
};

/// Largest |sum of an attribute's three worths|. Zero for a perfectly effects-coded table.
double max_zero_sum_deviation(const PartWorthTable& table);

/// Reads `emergency,attribute,level,worth,se`. All rows must share one emergency and
/// every (attribute, level) pair must appear exactly once.
PartWorthTable read_partworths(std::istream& in, std::string_view source);
PartWorthTable load_partworths(const std::filesystem::path& path);

/// One table per emergency bucket, indexed by Emergency.
struct PartWorthSet {
  std::array<PartWorthTable, 3> tables{};

  const PartWorthTable& operator[](Emergency e) const { return tables[index_of(e)]; }
};

/// Loads partworths_{le,me,he}.csv from a directory.
PartWorthSet load_partworth_set(const std::filesystem::path& dir);

/// Relative importance per worth attribute, in percent (range / sum of ranges).
/// All zeros when every range is zero.
std::array<double, 5> relative_importance(const PartWorthTable& table);

struct RetailerProfile {
  Channel channel = Channel::unorganized;
  Level discount = Level::L1;
  Level quality = Level::L1;
  Level assortment = Level::L1;
  Level service = Level::L1;

  friend bool operator==(const RetailerProfile&, const RetailerProfile&) = default;
};

struct ChoiceParams {
  double mobility_exponent = 0.5;
  /// Physical stores closer than this are treated as this far (the 1/d^n term is singular at 0).
  double min_distance_km = 0.1;
  /// Online orders behave as if the depot were at least this far away (lead-time proxy).
  double epharm_min_distance_km = 10.0;
};

double effective_distance(Channel channel, double km, const ChoiceParams& params);

/// Distance level used for the part-worth lookup. E-pharmacy purchases always take the
/// "more than 10 km" level since distance stands in for delivery lead time.
Level distance_level(Channel channel, double effective_km);

/// Sum of the four store part-worths plus the distance part-worth, scaled by 1/d_eff^n.
double utility(double km, const RetailerProfile& retailer, const PartWorthTable& table,
               const ChoiceParams& params);

struct Candidate {
  RetailerProfile profile;
  std::int64_t retailer_id = 0;
  double km = 0.0;
};

struct ChoiceResult {
  Channel channel = Channel::unorganized;
  std::int64_t retailer_id = 0;
  double utility = 0.0;
};

/// Picks the candidate with the highest utility, negative or not. Ties go to the
/// channel precedence unorganized > organized > e-pharmacy, then the lower retailer id.
/// Throws ContractError on an empty candidate list.
ChoiceResult choose(std::span<const Candidate> candidates, const PartWorthTable& table,
                    const ChoiceParams& params);

}  // namespace rabm
