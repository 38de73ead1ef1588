#include "rabm/engine.hpp"

#include <algorithm>
#include <future>
#include <numeric>
#include <ostream>
#include <string>

#include "rabm/error.hpp"
#include "rabm/io.hpp"

namespace rabm {

Town::Town(std::vector<SiteRecord> sites) : sites_(std::move(sites)) {
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    if (auto ch = channel_of(sites_[i].kind))
      retailers_[index_of(*ch)].push_back(i);
    else
      households_.push_back(i);
  }
  for (auto c : kChannels) {
    const auto& list = retailers_[index_of(c)];
    auto& order = order_[index_of(c)];
    order.resize(households_.size() * list.size());
    std::vector<std::pair<double, std::uint32_t>> scratch(list.size());
    for (std::size_t h = 0; h < households_.size(); ++h) {
      const GeoPoint& home = sites_[households_[h]].point;
      for (std::size_t k = 0; k < list.size(); ++k)
        scratch[k] = {distance_km(home, sites_[list[k]].point), static_cast<std::uint32_t>(k)};
      std::sort(scratch.begin(), scratch.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return sites_[list[a.second]].id < sites_[list[b.second]].id;
      });
      for (std::size_t k = 0; k < list.size(); ++k) order[h * list.size() + k] = scratch[k].second;
    }
  }
}

std::span<const std::uint32_t> Town::order(Channel c, std::size_t h) const {
  const std::size_t n = retailers_[index_of(c)].size();
  return std::span<const std::uint32_t>(order_[index_of(c)]).subspan(h * n, n);
}

std::array<ChannelAttributes, 3> base_case_attributes() {
  return {{
      {Level::L2, Level::L3, Level::L1, Level::L3},
      {Level::L3, Level::L3, Level::L3, Level::L2},
      {Level::L3, Level::L3, Level::L3, Level::L1},
  }};
}

std::array<ChannelAttributes, 3> best_case_attributes() {
  return {{
      {Level::L3, Level::L3, Level::L3, Level::L3},
      {Level::L1, Level::L3, Level::L3, Level::L1},
      {Level::L1, Level::L3, Level::L3, Level::L1},
  }};
}

std::array<ChannelAttributes, 3> worst_case_attributes() {
  return {{
      {Level::L1, Level::L3, Level::L1, Level::L1},
      {Level::L3, Level::L3, Level::L3, Level::L3},
      {Level::L3, Level::L3, Level::L3, Level::L3},
  }};
}

RunSummary summarize(std::vector<WeeklyMetrics> weeks, long long shutdowns) {
  RunSummary s;
  s.weeks = std::move(weeks);
  s.shutdowns = shutdowns;
  long long with_purchases = 0;
  long long with_he = 0;
  for (const auto& w : s.weeks) {
    for (std::size_t c = 0; c < 3; ++c) s.avg_footprint[c] += static_cast<double>(w.footprint[c]);
    if (!w.no_purchases) {
      ++with_purchases;
      for (std::size_t c = 0; c < 3; ++c) s.avg_share[c] += w.share[c];
    }
    if (w.purchases_by_emergency[index_of(Emergency::high)] > 0) {
      ++with_he;
      s.avg_distance_he += w.mean_distance_by_emergency[index_of(Emergency::high)];
    }
  }
  if (!s.weeks.empty())
    for (auto& v : s.avg_footprint) v /= static_cast<double>(s.weeks.size());
  if (with_purchases > 0)
    for (auto& v : s.avg_share) v /= static_cast<double>(with_purchases);
  if (with_he > 0) s.avg_distance_he /= static_cast<double>(with_he);
  return s;
}

Simulation::Simulation(const ScenarioConfig& config, std::shared_ptr<const Town> town)
    : config_(config), town_(std::move(town)), rng_(config.seed) {
  if (!town_) throw ContractError("simulation needs a town");
  if (config_.horizon_weeks < 1) throw ValidationError("horizon must be at least one week");
  if (config_.review_window_weeks < 1) throw ValidationError("review window must be positive");
  if (!(config_.customers_per_agent > 0.0)) throw ValidationError("customers_per_agent must be positive");
  if (!(config_.choice.mobility_exponent >= 0.0)) throw ValidationError("mobility exponent must be >= 0");
  for (auto c : kChannels) {
    const auto& a = config_.attributes[index_of(c)];
    profiles_[index_of(c)] = {c, a.discount, a.quality, a.assortment, a.service};
    const double discount = config_.discount_scale.percent(a.discount);
    auto& list = retailers_[index_of(c)];
    list.reserve(town_->retailer_count(c));
    for (std::size_t k = 0; k < town_->retailer_count(c); ++k)
      list.emplace_back(town_->retailer(c, k).id, profiles_[index_of(c)], discount, config_.financials);
  }
}

long long Simulation::shutdowns() const {
  long long n = 0;
  for (const auto& r : retailers_[index_of(Channel::unorganized)])
    if (!r.alive()) ++n;
  return n;
}

WeeklyMetrics Simulation::step() {
  if (week_ >= config_.horizon_weeks) throw ContractError("step past the simulation horizon");

  const double fraction = demand_fraction(config_.calendar, week_);
  const auto active = activate(town_->household_count(), fraction, rng_);

  std::array<std::vector<long long>, 3> weekly;
  for (auto c : kChannels) weekly[index_of(c)].assign(retailers_[index_of(c)].size(), 0);

  WeeklyMetrics m;
  m.week = week_ + 1;
  m.activated = static_cast<long long>(active.size());
  double distance_sum = 0.0;
  std::array<double, 3> distance_by_emergency{};
  const double trip = config_.round_trip ? 2.0 : 1.0;

  std::array<Candidate, 3> candidates;
  std::array<std::uint32_t, 3> picked{};
  for (const auto& act : active) {
    const GeoPoint& home = town_->household(act.household).point;
    std::size_t n = 0;
    for (auto c : kChannels) {
      const auto& list = retailers_[index_of(c)];
      for (std::uint32_t k : town_->order(c, act.household)) {
        if (!list[k].alive()) continue;
        candidates[n] = {profiles_[index_of(c)], list[k].id(),
                         distance_km(home, town_->retailer(c, k).point)};
        picked[n] = k;
        ++n;
        break;
      }
    }
    if (n == 0) throw ValidationError("week " + std::to_string(m.week) + ": no alive retailer in any channel");

    const auto& table = config_.partworths[act.draw.level];
    const ChoiceResult choice = choose(std::span<const Candidate>(candidates.data(), n), table, config_.choice);
    std::size_t slot = 0;
    while (candidates[slot].profile.channel != choice.channel) ++slot;

    ++weekly[index_of(choice.channel)][picked[slot]];
    ++m.footprint[index_of(choice.channel)];
    const double traveled = choice.channel == Channel::epharm ? 0.0 : candidates[slot].km * trip;
    distance_sum += traveled;
    distance_by_emergency[index_of(act.draw.level)] += traveled;
    ++m.purchases_by_emergency[index_of(act.draw.level)];
  }

  for (auto c : kChannels) {
    auto& list = retailers_[index_of(c)];
    for (std::size_t k = 0; k < list.size(); ++k) list[k].record_week(weekly[index_of(c)][k]);
  }
  ++week_;

  if (week_ % config_.review_window_weeks == 0) {
    for (auto& r : retailers_[index_of(Channel::unorganized)])
      if (r.alive()) review_viability(r, config_.review_window_weeks, config_.customers_per_agent);
  }

  const long long purchases = m.activated;
  m.no_purchases = purchases == 0;
  if (purchases > 0) {
    for (std::size_t c = 0; c < 3; ++c)
      m.share[c] = 100.0 * static_cast<double>(m.footprint[c]) / static_cast<double>(purchases);
    m.mean_distance = distance_sum / static_cast<double>(purchases);
  }
  for (std::size_t e = 0; e < 3; ++e)
    if (m.purchases_by_emergency[e] > 0)
      m.mean_distance_by_emergency[e] = distance_by_emergency[e] / static_cast<double>(m.purchases_by_emergency[e]);
  m.active_unorganized = static_cast<long long>(retailers_[index_of(Channel::unorganized)].size()) - shutdowns();
  return m;
}

RunSummary run(const ScenarioConfig& config, std::shared_ptr<const Town> town) {
  Simulation sim(config, std::move(town));
  std::vector<WeeklyMetrics> weeks;
  weeks.reserve(static_cast<std::size_t>(config.horizon_weeks));
  for (long long w = 0; w < config.horizon_weeks; ++w) weeks.push_back(sim.step());
  return summarize(std::move(weeks), sim.shutdowns());
}

SensitivityResult sensitivity_suite(const ScenarioConfig& config, std::shared_ptr<const Town> town) {
  ScenarioConfig best = config;
  best.attributes = best_case_attributes();
  ScenarioConfig worst = config;
  worst.attributes = worst_case_attributes();
  auto f_best = std::async(std::launch::async, [&] { return run(best, town); });
  auto f_worst = std::async(std::launch::async, [&] { return run(worst, town); });
  SensitivityResult out;
  out.base = run(config, town);
  out.best = f_best.get();
  out.worst = f_worst.get();
  return out;
}

void write_weekly_csv(std::ostream& out, std::span<const WeeklyMetrics> weeks) {
  out << "week,fp_unorg,fp_org,fp_eph,share_unorg,share_org,share_eph,active_unorg,dist_all,dist_he,"
         "dist_me,dist_le\n";
  for (const auto& w : weeks) {
    out << w.week << ',' << w.footprint[0] << ',' << w.footprint[1] << ',' << w.footprint[2] << ','
        << format_fixed(w.share[0], 6) << ',' << format_fixed(w.share[1], 6) << ','
        << format_fixed(w.share[2], 6) << ',' << w.active_unorganized << ','
        << format_fixed(w.mean_distance, 6) << ','
        << format_fixed(w.mean_distance_by_emergency[index_of(Emergency::high)], 6) << ','
        << format_fixed(w.mean_distance_by_emergency[index_of(Emergency::medium)], 6) << ','
        << format_fixed(w.mean_distance_by_emergency[index_of(Emergency::low)], 6) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const RunSummary& s) {
  out << "avg_fp_unorg,avg_fp_org,avg_fp_eph,share_unorg,share_org,share_eph,shutdowns\n";
  out << format_fixed(s.avg_footprint[0], 6) << ',' << format_fixed(s.avg_footprint[1], 6) << ','
      << format_fixed(s.avg_footprint[2], 6) << ',' << format_fixed(s.avg_share[0], 6) << ','
      << format_fixed(s.avg_share[1], 6) << ',' << format_fixed(s.avg_share[2], 6) << ','
      << s.shutdowns << '\n';
}

}  // namespace rabm
