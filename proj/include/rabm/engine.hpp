#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "rabm/choice.hpp"
#include "rabm/demand.hpp"
#include "rabm/geo.hpp"
#include "rabm/market.hpp"
#include "rabm/rng.hpp"

namespace rabm {

/// Immutable spatial index over a site list: households plus, for every household, the
/// retailers of each channel ordered by (distance, id). Shared read-only between runs.
class Town {
 public:
  explicit Town(std::vector<SiteRecord> sites);

  std::span<const SiteRecord> sites() const { return sites_; }
  std::size_t household_count() const { return households_.size(); }
  const SiteRecord& household(std::size_t i) const { return sites_[households_[i]]; }

  /// Retailer sites of one channel, in input order.
  std::span<const std::size_t> retailers(Channel c) const { return retailers_[index_of(c)]; }
  const SiteRecord& retailer(Channel c, std::size_t k) const {
    return sites_[retailers_[index_of(c)][k]];
  }
  std::size_t retailer_count(Channel c) const { return retailers_[index_of(c)].size(); }

  /// Channel-local retailer indices, nearest first, for household `h`.
  std::span<const std::uint32_t> order(Channel c, std::size_t h) const;

 private:
  std::vector<SiteRecord> sites_;
  std::vector<std::size_t> households_;
  std::array<std::vector<std::size_t>, 3> retailers_;
  std::array<std::vector<std::uint32_t>, 3> order_;
};

struct ChannelAttributes {
  Level discount = Level::L1;
  Level quality = Level::L1;
  Level assortment = Level::L1;
  Level service = Level::L1;

  friend bool operator==(const ChannelAttributes&, const ChannelAttributes&) = default;
};

/// Base case: unorganized {M discount, H quality, small assortment, H service},
/// organized {H, H, large, M}, e-pharmacy {H, H, large, L}.
std::array<ChannelAttributes, 3> base_case_attributes();

/// Most favourable setting for unorganized stores against weak competitors.
std::array<ChannelAttributes, 3> best_case_attributes();

/// Mirror of the best case: weak unorganized stores against strong competitors.
std::array<ChannelAttributes, 3> worst_case_attributes();

struct ScenarioConfig {
  PartWorthSet partworths;
  DemandCalendar calendar;
  std::array<ChannelAttributes, 3> attributes = base_case_attributes();
  ChoiceParams choice;
  Financials financials;  // applies to unorganized stores, the only ones reviewed
  DiscountScale discount_scale;
  /// Paying customers represented by one simulated household purchase (accounting only).
  double customers_per_agent = 50.0;
  long long horizon_weeks = 312;
  long long review_window_weeks = 26;
  std::uint64_t seed = 1;
  /// Record distance traveled as a round trip instead of one way.
  bool round_trip = false;
};

struct WeeklyMetrics {
  long long week = 0;  // 1-based
  long long activated = 0;
  std::array<long long, 3> footprint{};  // by Channel
  std::array<double, 3> share{};         // percent of the week's purchases
  bool no_purchases = false;
  long long active_unorganized = 0;      // after this week's review
  double mean_distance = 0.0;            // over all purchases; e-pharmacy counts 0 km
  std::array<double, 3> mean_distance_by_emergency{};  // by Emergency
  std::array<long long, 3> purchases_by_emergency{};
};

struct RunSummary {
  std::vector<WeeklyMetrics> weeks;
  std::array<double, 3> avg_footprint{};
  /// Mean of the weekly shares over weeks with at least one purchase.
  std::array<double, 3> avg_share{};
  long long shutdowns = 0;
  /// Mean of the weekly HE distance over weeks with HE purchases.
  double avg_distance_he = 0.0;
};

RunSummary summarize(std::vector<WeeklyMetrics> weeks, long long shutdowns);

/// One simulation run. Weeks are strictly sequential.
class Simulation {
 public:
  Simulation(const ScenarioConfig& config, std::shared_ptr<const Town> town);

  /// Runs one week: activate demand, route every active customer to the best of its
  /// nearest alive retailer per channel, credit footprints, review unorganized stores at
  /// the end of each review window. Throws ContractError past the horizon.
  WeeklyMetrics step();

  long long weeks_done() const { return week_; }
  const std::vector<RetailerState>& retailers(Channel c) const { return retailers_[index_of(c)]; }
  long long shutdowns() const;

 private:
  ScenarioConfig config_;
  std::shared_ptr<const Town> town_;
  std::array<std::vector<RetailerState>, 3> retailers_;
  std::array<RetailerProfile, 3> profiles_;
  Rng rng_;
  long long week_ = 0;
};

RunSummary run(const ScenarioConfig& config, std::shared_ptr<const Town> town);

struct SensitivityResult {
  RunSummary base;
  RunSummary best;
  RunSummary worst;
};

/// Runs the configured attributes, the best case and the worst case with the same seed.
SensitivityResult sensitivity_suite(const ScenarioConfig& config, std::shared_ptr<const Town> town);

void write_weekly_csv(std::ostream& out, std::span<const WeeklyMetrics> weeks);
void write_summary_csv(std::ostream& out, const RunSummary& summary);

}  // namespace rabm
