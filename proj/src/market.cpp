#include "rabm/market.hpp"

#include <string>

#include "rabm/error.hpp"

namespace rabm {

double DiscountScale::percent(Level level) const {
  switch (level) {
    case Level::L1: return low;
    case Level::L2: return medium;
    case Level::L3: return high;
  }
  return low;
}

double sales_profit(double order_size, double footprint, double margin_pct, double discount_pct) {
  if (footprint < 0.0) throw ContractError("footprint must be non-negative");
  return order_size * footprint * (margin_pct - discount_pct) / 100.0;
}

double total_cost(double weekly_cost, long long weeks) {
  if (weeks < 0) throw ContractError("weeks must be non-negative");
  return weekly_cost * static_cast<double>(weeks);
}

RetailerState::RetailerState(std::int64_t id, RetailerProfile profile, double discount_pct,
                             Financials financials)
    : id_(id), profile_(profile), discount_pct_(discount_pct), financials_(financials) {}

void RetailerState::record_week(long long footprint) {
  if (footprint < 0) throw ContractError("footprint must be non-negative");
  if (!alive_ && footprint != 0)
    throw ContractError("retailer " + std::to_string(id_) + " is closed and cannot serve customers");
  ledger_.push_back(footprint);
}

void RetailerState::shut_down(long long week) {
  if (profile_.channel != Channel::unorganized)
    throw ContractError("only unorganized retailers can shut down");
  if (!alive_) return;
  alive_ = false;
  shutdown_week_ = week;
}

double window_sales_profit(const RetailerState& state, long long window_weeks,
                           double customers_per_agent) {
  const auto& ledger = state.footprints();
  const auto n = static_cast<long long>(ledger.size());
  long long agents = 0;
  for (long long w = std::max(0LL, n - window_weeks); w < n; ++w) agents += ledger[static_cast<std::size_t>(w)];
  const auto& f = state.financials();
  return sales_profit(f.order_size, static_cast<double>(agents) * customers_per_agent,
                      f.gross_margin_pct, state.discount_pct());
}

Viability review_viability(RetailerState& state, long long window_weeks, double customers_per_agent) {
  if (state.channel() != Channel::unorganized)
    throw ContractError("viability review applies to unorganized retailers only (retailer " +
                        std::to_string(state.id()) + ")");
  if (window_weeks <= 0) throw ContractError("review window must be positive");
  const auto n = static_cast<long long>(state.footprints().size());
  if (n < window_weeks) throw ContractError("review called before a full window was recorded");
  if (!state.alive()) return Viability::shutdown;

  const auto& f = state.financials();
  const double profit = window_sales_profit(state, window_weeks, customers_per_agent);
  const double threshold =
      total_cost(f.weekly_cost, window_weeks) + static_cast<double>(window_weeks) * f.weekly_min_profit;
  if (profit < threshold) {
    state.shut_down(n);
    return Viability::shutdown;
  }
  return Viability::keep;
}

}  // namespace rabm
