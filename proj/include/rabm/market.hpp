#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rabm/choice.hpp"
#include "rabm/types.hpp"

namespace rabm {

inline constexpr double kWeeksPerMonth = 4.345;

struct Financials {
  double order_size = 1500.0;
  double gross_margin_pct = 25.0;
  double weekly_cost = 12098.0 / kWeeksPerMonth;
  double weekly_min_profit = 10000.0;
};

/// Price discount (percent) that stands for each discount level in the accounting.
struct DiscountScale {
  double low = 5.0;
  double medium = 15.0;
  double high = 22.0;

  double percent(Level level) const;
};

/// order_size * footprint * (margin - discount) / 100. Negative when discount > margin.
double sales_profit(double order_size, double footprint, double margin_pct, double discount_pct);

/// weekly_cost * weeks.
double total_cost(double weekly_cost, long long weeks);

enum class Viability { keep, shutdown };

class RetailerState {
 public:
  RetailerState(std::int64_t id, RetailerProfile profile, double discount_pct, Financials financials);

  std::int64_t id() const { return id_; }
  Channel channel() const { return profile_.channel; }
  const RetailerProfile& profile() const { return profile_; }
  double discount_pct() const { return discount_pct_; }
  const Financials& financials() const { return financials_; }
  bool alive() const { return alive_; }
  std::optional<long long> shutdown_week() const { return shutdown_week_; }

  /// Weekly footprints recorded so far (agent counts, one entry per elapsed week).
  const std::vector<long long>& footprints() const { return ledger_; }

  /// Appends one week's footprint. A closed store can only record zero.
  void record_week(long long footprint);

  void shut_down(long long week);

 private:
  std::int64_t id_;
  RetailerProfile profile_;
  double discount_pct_;
  Financials financials_;
  std::vector<long long> ledger_;
  bool alive_ = true;
  std::optional<long long> shutdown_week_;
};

/// Sales profit over the last `window_weeks` ledger entries; each recorded agent
/// stands for `customers_per_agent` paying customers.
double window_sales_profit(const RetailerState& state, long long window_weeks,
                           double customers_per_agent);

/// Six-month review of an unorganized store: shut down when the window's sales profit
/// is below the window's total cost plus the minimum survival profit. On shutdown the
/// state is closed at week `ledger size`. Requires a complete window in the ledger.
/// Throws ContractError for organized or e-pharmacy retailers.
Viability review_viability(RetailerState& state, long long window_weeks = 26,
                           double customers_per_agent = 1.0);

}  // namespace rabm
