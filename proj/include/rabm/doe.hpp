#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rabm/engine.hpp"

namespace rabm {

inline constexpr std::size_t kFactorialRuns = 27;

/// Which channel attribute the three factors drive: unorganized, organized, e-pharmacy.
enum class SweepMode { discount, quality };

std::string_view to_string(SweepMode m);
SweepMode parse_sweep_mode(std::string_view text);

struct FactorialDesign {
  std::array<std::string, 3> factor_names;
  /// Standard order: the first factor changes slowest.
  std::array<std::array<Level, 3>, kFactorialRuns> runs{};
};

FactorialDesign full_factorial(std::array<std::string, 3> factor_names = {"f1", "f2", "f3"});
std::array<std::string, 3> factor_names(SweepMode mode);

struct AnovaRow {
  std::string source;
  int df = 0;
  double ss = 0.0;
  double ms = 0.0;
  double f = 0.0;  // sources only
  double p = 0.0;  // sources only
  double contribution = 0.0;  // percent of total SS
};

struct AnovaTable {
  /// Three main effects, three two-way interactions, Error, Total.
  std::vector<AnovaRow> rows;
  double r_squared = 0.0;
  double adj_r_squared = 0.0;
  /// Zero total variation: contributions are 0 and F is undefined.
  bool degenerate = false;

  const AnovaRow& row(std::string_view source) const;
};

/// Balanced fixed-effects ANOVA of a single-replicate 3^3 design with the three-way
/// interaction as error. `response` follows the design's standard order.
AnovaTable anova3(const FactorialDesign& design, std::span<const double> response);

struct EffectTables {
  double grand_mean = 0.0;
  std::array<std::array<double, 3>, 3> main{};  // [factor][level]
  /// Cell means for factor pairs (0,1), (0,2), (1,2): [pair][level a][level b].
  std::array<std::array<std::array<double, 3>, 3>, 3> pairs{};
};

inline constexpr std::array<std::array<int, 2>, 3> kFactorPairs = {{{0, 1}, {0, 2}, {1, 2}}};

EffectTables effect_tables(const FactorialDesign& design, std::span<const double> response);

enum class Response { fp_unorg, fp_org, fp_eph, share_unorg, share_org, share_eph, shutdowns };
inline constexpr std::array<Response, 7> kResponses = {
    Response::fp_unorg,  Response::fp_org,    Response::fp_eph,   Response::share_unorg,
    Response::share_org, Response::share_eph, Response::shutdowns};
std::string_view to_string(Response r);

struct SweepRow {
  int run = 0;  // 1-based
  std::array<Level, 3> levels{};
  std::array<double, 3> footprint{};
  std::array<double, 3> share{};
  long long shutdowns = 0;

  double response(Response r) const;
};

/// Runs the engine once per design row, changing only the bound attribute of each
/// channel. Row i uses derive_seed(master_seed, i). Rows run on up to `threads`
/// workers; the result is in design order regardless. `on_run`, when set, sees each
/// row's full run (0-based row index) on the worker thread that ran it.
using SweepObserver = std::function<void(std::size_t, const RunSummary&)>;
std::vector<SweepRow> sweep(const ScenarioConfig& base, std::shared_ptr<const Town> town,
                            const FactorialDesign& design, SweepMode mode, std::uint64_t master_seed,
                            unsigned threads = 0, const SweepObserver& on_run = {});

std::vector<double> response_column(std::span<const SweepRow> rows, Response r);

/// run,f1,f2,f3,fp_unorg,fp_org,fp_eph,share_unorg,share_org,share_eph,shutdowns
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);
std::vector<SweepRow> read_sweep_csv(std::istream& in, std::string_view source);

/// One numeric column of a CSV. An empty `column` is allowed when the file has one column.
std::vector<double> read_response_column(std::istream& in, std::string_view source, std::string_view column);

/// source,df,adj_ss,adj_ms,f,p,contribution
void write_anova_csv(std::ostream& out, const AnovaTable& table);
/// r_squared,adj_r_squared,degenerate
void write_anova_summary_csv(std::ostream& out, const AnovaTable& table);
/// effect,factor_a,factor_b,level_a,level_b,mean
void write_effects_csv(std::ostream& out, const FactorialDesign& design, const EffectTables& effects);

}  // namespace rabm
