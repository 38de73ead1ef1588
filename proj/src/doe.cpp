#include "rabm/doe.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>

#include "rabm/error.hpp"
#include "rabm/io.hpp"
#include "rabm/rng.hpp"
#include "rabm/stats.hpp"

namespace rabm {

std::string_view to_string(SweepMode m) { return m == SweepMode::discount ? "discount" : "quality"; }

SweepMode parse_sweep_mode(std::string_view text) {
  if (text == "discount") return SweepMode::discount;
  if (text == "quality") return SweepMode::quality;
  throw ValidationError("unknown sweep mode '" + std::string(text) + "' (expected discount or quality)");
}

FactorialDesign full_factorial(std::array<std::string, 3> names) {
  FactorialDesign d;
  d.factor_names = std::move(names);
  for (std::size_t i = 0; i < kFactorialRuns; ++i)
    d.runs[i] = {kLevels[i / 9], kLevels[(i / 3) % 3], kLevels[i % 3]};
  return d;
}

std::array<std::string, 3> factor_names(SweepMode mode) {
  const std::string suffix = mode == SweepMode::discount ? "_discount" : "_quality";
  return {"unorganized" + suffix, "organized" + suffix, "epharmacy" + suffix};
}

const AnovaRow& AnovaTable::row(std::string_view source) const {
  for (const auto& r : rows)
    if (r.source == source) return r;
  throw ContractError("no ANOVA source '" + std::string(source) + "'");
}

namespace {

using Cube = std::array<std::array<std::array<double, 3>, 3>, 3>;

Cube to_cube(const FactorialDesign& design, std::span<const double> response) {
  if (response.size() != kFactorialRuns)
    throw ValidationError("ANOVA needs exactly 27 responses, got " + std::to_string(response.size()));
  Cube y{};
  std::array<std::array<std::array<int, 3>, 3>, 3> seen{};
  for (std::size_t i = 0; i < kFactorialRuns; ++i) {
    const auto& r = design.runs[i];
    const auto a = index_of(r[0]), b = index_of(r[1]), c = index_of(r[2]);
    if (seen[a][b][c]++) throw ContractError("design repeats a level combination");
    if (!std::isfinite(response[i])) throw ValidationError("response " + std::to_string(i + 1) + " is not finite");
    y[a][b][c] = response[i];
  }
  return y;
}

}  // namespace

EffectTables effect_tables(const FactorialDesign& design, std::span<const double> response) {
  const Cube y = to_cube(design, response);
  EffectTables e;
  double total = 0.0;
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t c = 0; c < 3; ++c) {
        const std::array<std::size_t, 3> idx{a, b, c};
        const double v = y[a][b][c];
        total += v;
        for (std::size_t f = 0; f < 3; ++f) e.main[f][idx[f]] += v / 9.0;
        for (std::size_t p = 0; p < 3; ++p) {
          const auto [i, j] = kFactorPairs[p];
          e.pairs[p][idx[static_cast<std::size_t>(i)]][idx[static_cast<std::size_t>(j)]] += v / 3.0;
        }
      }
  e.grand_mean = total / 27.0;
  return e;
}

AnovaTable anova3(const FactorialDesign& design, std::span<const double> response) {
  const Cube y = to_cube(design, response);
  const EffectTables e = effect_tables(design, response);
  const double g = e.grand_mean;

  std::array<double, 3> ss_main{};
  for (std::size_t f = 0; f < 3; ++f)
    for (double m : e.main[f]) ss_main[f] += 9.0 * (m - g) * (m - g);

  std::array<double, 3> ss_pair{};
  for (std::size_t p = 0; p < 3; ++p) {
    const auto [i, j] = kFactorPairs[p];
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b) {
        const double r = e.pairs[p][a][b] - e.main[static_cast<std::size_t>(i)][a] -
                         e.main[static_cast<std::size_t>(j)][b] + g;
        ss_pair[p] += 3.0 * r * r;
      }
  }

  double ss_total = 0.0, ss_error = 0.0, sum_sq = 0.0;
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t c = 0; c < 3; ++c) {
        const double v = y[a][b][c];
        // Fitted value of the model with all main effects and two-way interactions.
        const double fit = e.pairs[0][a][b] + e.pairs[1][a][c] + e.pairs[2][b][c] - e.main[0][a] -
                           e.main[1][b] - e.main[2][c] + g;
        ss_total += (v - g) * (v - g);
        ss_error += (v - fit) * (v - fit);
        sum_sq += v * v;
      }

  AnovaTable t;
  t.degenerate = ss_total <= 1e-24 * std::max(sum_sq, 1.0);
  const double ms_error = ss_error / 8.0;
  auto add_source = [&](std::string name, int df, double ss) {
    AnovaRow r{std::move(name), df, ss, ss / df, 0.0, 0.0, 0.0};
    if (t.degenerate) {
      r.f = std::numeric_limits<double>::quiet_NaN();
      r.p = std::numeric_limits<double>::quiet_NaN();
    } else {
      r.contribution = 100.0 * ss / ss_total;
      r.f = ms_error > 0.0 ? r.ms / ms_error : std::numeric_limits<double>::infinity();
      r.p = f_upper_tail(r.f, df, 8.0);
    }
    t.rows.push_back(std::move(r));
  };
  for (std::size_t f = 0; f < 3; ++f) add_source(design.factor_names[f], 2, ss_main[f]);
  for (std::size_t p = 0; p < 3; ++p) {
    const auto [i, j] = kFactorPairs[p];
    add_source(design.factor_names[static_cast<std::size_t>(i)] + "*" + design.factor_names[static_cast<std::size_t>(j)], 4,
               ss_pair[p]);
  }
  t.rows.push_back({"Error", 8, ss_error, ms_error, 0.0, 0.0, t.degenerate ? 0.0 : 100.0 * ss_error / ss_total});
  t.rows.push_back({"Total", 26, ss_total, ss_total / 26.0, 0.0, 0.0, t.degenerate ? 0.0 : 100.0});
  if (!t.degenerate) {
    t.r_squared = 1.0 - ss_error / ss_total;
    t.adj_r_squared = 1.0 - (ss_error / 8.0) / (ss_total / 26.0);
  }
  return t;
}

std::string_view to_string(Response r) {
  switch (r) {
    case Response::fp_unorg: return "fp_unorg";
    case Response::fp_org: return "fp_org";
    case Response::fp_eph: return "fp_eph";
    case Response::share_unorg: return "share_unorg";
    case Response::share_org: return "share_org";
    case Response::share_eph: return "share_eph";
    case Response::shutdowns: return "shutdowns";
  }
  return "?";
}

double SweepRow::response(Response r) const {
  switch (r) {
    case Response::fp_unorg: return footprint[0];
    case Response::fp_org: return footprint[1];
    case Response::fp_eph: return footprint[2];
    case Response::share_unorg: return share[0];
    case Response::share_org: return share[1];
    case Response::share_eph: return share[2];
    case Response::shutdowns: return static_cast<double>(shutdowns);
  }
  return 0.0;
}

std::vector<SweepRow> sweep(const ScenarioConfig& base, std::shared_ptr<const Town> town,
                            const FactorialDesign& design, SweepMode mode, std::uint64_t master_seed,
                            unsigned threads, const SweepObserver& on_run) {
  std::vector<SweepRow> rows(kFactorialRuns);
  std::vector<std::exception_ptr> errors(kFactorialRuns);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < kFactorialRuns;) {
      try {
        ScenarioConfig cfg = base;
        cfg.seed = derive_seed(master_seed, i);
        for (std::size_t c = 0; c < 3; ++c) {
          auto& attr = cfg.attributes[c];
          (mode == SweepMode::discount ? attr.discount : attr.quality) = design.runs[i][c];
        }
        const RunSummary s = run(cfg, town);
        if (on_run) on_run(i, s);
        SweepRow& r = rows[i];
        r.run = static_cast<int>(i) + 1;
        r.levels = design.runs[i];
        r.footprint = s.avg_footprint;
        r.share = s.avg_share;
        r.shutdowns = s.shutdowns;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, kFactorialRuns);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < kFactorialRuns; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw ValidationError("sweep run " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return rows;
}

std::vector<double> response_column(std::span<const SweepRow> rows, Response r) {
  std::vector<double> out;
  for (const auto& row : rows) out.push_back(row.response(r));
  return out;
}

namespace {
constexpr std::string_view kSweepHeader =
    "run,f1,f2,f3,fp_unorg,fp_org,fp_eph,share_unorg,share_org,share_eph,shutdowns";
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << kSweepHeader << '\n';
  for (const auto& r : rows) {
    out << r.run;
    for (auto l : r.levels) out << ',' << level_letter(l);
    for (double v : r.footprint) out << ',' << format_fixed(v, 4);
    for (double v : r.share) out << ',' << format_fixed(v, 4);
    out << ',' << r.shutdowns << '\n';
  }
}

std::vector<SweepRow> read_sweep_csv(std::istream& in, std::string_view source) {
  const CsvTable table = read_csv(in, source);
  std::string header;
  for (std::size_t i = 0; i < table.header.size(); ++i) header += (i ? "," : "") + table.header[i];
  if (header != kSweepHeader) throw ParseError(std::string(source) + ": expected header " + std::string(kSweepHeader));
  std::vector<SweepRow> rows;
  for (const auto& row : table.rows) {
    try {
      SweepRow r;
      r.run = static_cast<int>(parse_int(row.fields[0]));
      for (std::size_t c = 0; c < 3; ++c) r.levels[c] = parse_level(row.fields[1 + c]);
      for (std::size_t c = 0; c < 3; ++c) r.footprint[c] = parse_double(row.fields[4 + c]);
      for (std::size_t c = 0; c < 3; ++c) r.share[c] = parse_double(row.fields[7 + c]);
      r.shutdowns = parse_int(row.fields[10]);
      rows.push_back(r);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(std::string(source) + ":" + std::to_string(row.line) + ": " + e.what());
    }
  }
  return rows;
}

std::vector<double> read_response_column(std::istream& in, std::string_view source, std::string_view column) {
  const CsvTable table = read_csv(in, source);
  std::size_t col = 0;
  if (column.empty()) {
    if (table.header.size() != 1)
      throw ValidationError(std::string(source) + ": file has several columns; choose one with --column");
  } else {
    col = column_index(table, column, source);
  }
  std::vector<double> values;
  for (const auto& row : table.rows) {
    try {
      values.push_back(parse_double(row.fields[col]));
    } catch (const std::exception&) {
      throw ParseError(std::string(source) + ":" + std::to_string(row.line) + ": not a number: '" + row.fields[col] + "'");
    }
  }
  return values;
}

void write_anova_csv(std::ostream& out, const AnovaTable& t) {
  out << "source,df,adj_ss,adj_ms,f,p,contribution\n";
  for (const auto& r : t.rows) {
    const bool source = r.source != "Error" && r.source != "Total";
    out << r.source << ',' << r.df << ',' << format_double(r.ss) << ',';
    if (r.source != "Total") out << format_double(r.ms);
    out << ',';
    if (source) out << (t.degenerate ? "nan" : format_double(r.f));
    out << ',';
    if (source) out << (t.degenerate ? "nan" : format_double(r.p));
    out << ',' << format_double(r.contribution) << '\n';
  }
}

void write_anova_summary_csv(std::ostream& out, const AnovaTable& t) {
  out << "r_squared,adj_r_squared,degenerate\n";
  out << format_double(100.0 * t.r_squared) << ',' << format_double(100.0 * t.adj_r_squared) << ','
      << (t.degenerate ? 1 : 0) << '\n';
}

void write_effects_csv(std::ostream& out, const FactorialDesign& d, const EffectTables& e) {
  out << "effect,factor_a,factor_b,level_a,level_b,mean\n";
  out << "grand,,,,," << format_double(e.grand_mean) << '\n';
  for (std::size_t f = 0; f < 3; ++f)
    for (std::size_t l = 0; l < 3; ++l)
      out << "main," << d.factor_names[f] << ",," << level_letter(kLevels[l]) << ",," << format_double(e.main[f][l])
          << '\n';
  for (std::size_t p = 0; p < 3; ++p) {
    const auto [i, j] = kFactorPairs[p];
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b)
        out << "interaction," << d.factor_names[static_cast<std::size_t>(i)] << ','
            << d.factor_names[static_cast<std::size_t>(j)] << ',' << level_letter(kLevels[a]) << ','
            << level_letter(kLevels[b]) << ',' << format_double(e.pairs[p][a][b]) << '\n';
  }
}

}  // namespace rabm
