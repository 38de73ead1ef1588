#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "rabm/doe.hpp"
#include "rabm/error.hpp"
#include "rabm/io.hpp"
#include "rabm/rng.hpp"
#include "rabm/stats.hpp"
#include "anova_oracle.hpp"
#include "support.hpp"

using namespace rabm;

namespace {

std::vector<SweepRow> bundled_rows(SweepMode mode) {
  const auto path = test::data_dir() / (mode == SweepMode::discount ? "table_d1.csv" : "table_d7.csv");
  std::ifstream in(path);
  return read_sweep_csv(in, path.string());
}

// F density integrated from 0 to f; independent of the incomplete-beta route.
double f_tail_by_quadrature(double f, double d1, double d2) {
  const double logc = std::lgamma((d1 + d2) / 2) - std::lgamma(d1 / 2) - std::lgamma(d2 / 2) +
                      d1 / 2 * std::log(d1 / d2);
  auto pdf = [&](double x) {
    if (x <= 0.0) return 0.0;
    return std::exp(logc + (d1 / 2 - 1) * std::log(x) - (d1 + d2) / 2 * std::log1p(d1 * x / d2));
  };
  boost::math::quadrature::tanh_sinh<double> q;
  // Substitute x = t / (1 - t) so the upper tail is a finite interval.
  const double t0 = f / (1.0 + f);
  return q.integrate([&](double t) { return pdf(t / (1 - t)) / ((1 - t) * (1 - t)); }, t0, 1.0);
}

}  // namespace

TEST_CASE("full factorial in standard order") {
  const auto d = full_factorial();
  CHECK(d.runs[0] == std::array<Level, 3>{Level::L1, Level::L1, Level::L1});
  CHECK(d.runs[13] == std::array<Level, 3>{Level::L2, Level::L2, Level::L2});
  CHECK(d.runs[26] == std::array<Level, 3>{Level::L3, Level::L3, Level::L3});
  CHECK(d.runs[1] == std::array<Level, 3>{Level::L1, Level::L1, Level::L2});
  CHECK(d.runs[9] == std::array<Level, 3>{Level::L2, Level::L1, Level::L1});
}

TEST_CASE("F upper tail") {
  Rng r(17);
  for (int i = 0; i < 20; ++i) {
    const double d1 = 1.0 + static_cast<double>(r.below(6)), d2 = 2.0 + static_cast<double>(r.below(30));
    const double f = 0.05 + 20.0 * r.uniform();
    CHECK(std::fabs(f_upper_tail(f, d1, d2) - f_tail_by_quadrature(f, d1, d2)) < 1e-8);
  }
  CHECK(f_upper_tail(0.0, 2, 8) == 1.0);
  CHECK(f_upper_tail(-3.0, 2, 8) == 1.0);
  CHECK(f_upper_tail(1.0, 7, 7) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f_upper_tail(INFINITY, 2, 8) == 0.0);
  double previous = 1.0;
  for (double f = 0.1; f < 50; f *= 1.3) {
    const double p = f_upper_tail(f, 4, 8);
    CHECK(p <= previous);
    previous = p;
  }
  CHECK(normal_two_sided_p(1.959963984540054) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(student_t_upper_quantile(0.05, 10) == doctest::Approx(1.812461123).epsilon(1e-8));
}

TEST_CASE("sum of squares matches least squares and adds up") {
  const auto d = full_factorial();
  const test::LeastSquaresOracle oracle(d);
  const std::array<std::string, 6> sources = {"f1", "f2", "f3", "f1*f2", "f1*f3", "f2*f3"};
  Rng r(123);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> y(27);
    Eigen::VectorXd v(27);
    const double scale = std::pow(10.0, static_cast<double>(r.below(7)) - 2.0);
    for (int i = 0; i < 27; ++i) v(i) = y[static_cast<std::size_t>(i)] = scale * r.normal() + scale * r.below(3);
    const auto t = anova3(d, y);
    const double full = oracle.rss(6, v);
    double sum = 0.0;
    for (std::size_t s = 0; s < 6; ++s) {
      const double expected = oracle.rss(s, v) - full;
      CHECK(std::fabs(t.row(sources[s]).ss - expected) <= 1e-8 * t.row("Total").ss);
      sum += t.row(sources[s]).ss;
    }
    CHECK(std::fabs(t.row("Error").ss - full) <= 1e-8 * t.row("Total").ss);
    CHECK(std::fabs(sum + t.row("Error").ss - t.row("Total").ss) <= 1e-6 * t.row("Total").ss);
  }
}

TEST_CASE("bundled sweep tables reproduce the published ANOVA") {
  const auto table = read_csv_file(test::fixture_dir() / "anova_golden.csv");
  std::map<std::string, AnovaTable> fitted;
  int checked = 0;
  for (const auto& rec : table.rows) {
    auto field = [&](std::string_view name) { return rec.fields[column_index(table, name, "golden")]; };
    const std::string key = field("mode") + "/" + field("response");
    if (!fitted.count(key)) {
      const auto mode = parse_sweep_mode(field("mode"));
      const auto rows = bundled_rows(mode);
      Response resp{};
      for (auto r : kResponses)
        if (to_string(r) == field("response")) resp = r;
      fitted[key] = anova3(full_factorial(factor_names(mode)), response_column(rows, resp));
    }
    const auto& row = fitted[key].row(field("source"));
    INFO(key << " " << field("source"));
    auto tolerance = [&](double printed, std::string_view decimals) {
      return std::max(0.005 * std::fabs(printed), 0.5 * std::pow(10.0, -parse_double(decimals)));
    };
    CHECK(row.df == parse_int(field("df")));
    const double ss = parse_double(field("ss"));
    CHECK(std::fabs(row.ss - ss) <= tolerance(ss, field("ss_decimals")));
    if (!field("f").empty()) {
      const double f = parse_double(field("f"));
      CHECK(std::fabs(row.f - f) <= tolerance(f, field("f_decimals")));
    }
    if (!field("contribution").empty())
      CHECK(std::fabs(row.contribution - parse_double(field("contribution"))) <= 0.1);
    ++checked;
  }
  CHECK(checked == 14 * 8);
  CHECK(fitted["discount/shutdowns"].row("unorganized_discount").f == doctest::Approx(12800.66).epsilon(1e-4));
  const auto& inter = fitted["quality/fp_unorg"].row("unorganized_quality*organized_quality");
  CHECK(std::fabs(inter.ss - 72482538) <= 1.0);
  CHECK(std::fabs(inter.p - 0.001) <= 0.002);
  CHECK(fitted["discount/fp_unorg"].r_squared == doctest::Approx(0.9796).epsilon(1e-4));
}

TEST_CASE("degenerate and malformed responses") {
  const auto d = full_factorial();
  const std::vector<double> flat(27, 4.0);
  const auto t = anova3(d, flat);
  CHECK(t.degenerate);
  for (const auto& r : t.rows) CHECK(r.contribution == 0.0);
  const std::vector<double> short_column(26, 1.0);
  CHECK_THROWS_AS(anova3(d, short_column), ValidationError);
}

TEST_CASE("effect tables") {
  const auto rows = bundled_rows(SweepMode::discount);
  const auto y = response_column(rows, Response::fp_unorg);
  const auto e = effect_tables(full_factorial(), y);
  double sum = 0.0;
  for (double v : y) sum += v;
  CHECK(e.grand_mean == doctest::Approx(sum / 27));
  for (int f = 0; f < 3; ++f)
    CHECK((e.main[f][0] + e.main[f][1] + e.main[f][2]) / 3 == doctest::Approx(e.grand_mean));
  // Unorganized discount: medium is best by a wide margin.
  CHECK(e.main[0][1] > e.main[0][0] + 1000);
  CHECK(e.main[0][1] > e.main[0][2] + 1000);
  for (std::size_t p = 0; p < 3; ++p)
    for (std::size_t a = 0; a < 3; ++a) {
      double row = 0.0;
      for (std::size_t b = 0; b < 3; ++b) row += e.pairs[p][a][b];
      CHECK(row / 3 == doctest::Approx(e.main[static_cast<std::size_t>(kFactorPairs[p][0])][a]));
    }
}

TEST_CASE("sweep csv round trip") {
  const auto rows = bundled_rows(SweepMode::quality);
  std::stringstream s;
  write_sweep_csv(s, rows);
  const auto back = read_sweep_csv(s, "round trip");
  REQUIRE(back.size() == 27);
  for (std::size_t i = 0; i < 27; ++i) {
    CHECK(back[i].levels == rows[i].levels);
    CHECK(back[i].footprint == rows[i].footprint);
    CHECK(back[i].shutdowns == rows[i].shutdowns);
  }
  CHECK_THROWS(parse_sweep_mode("price"));
}
