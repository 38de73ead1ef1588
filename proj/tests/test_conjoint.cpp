#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rabm/choice.hpp"
#include "rabm/conjoint.hpp"
#include "rabm/error.hpp"
#include "support.hpp"

using namespace rabm;

namespace {

Worths he_worths() { return worths_of(load_partworths(test::data_dir() / "partworths_he.csv")); }

const ChoiceDesign& design42() {
  static const ChoiceDesign d = generate_design(store_attributes(), 16, 4, 42).design;
  return d;
}

}  // namespace

TEST_CASE("minimum sample size") {
  CHECK(min_sample_size(3, 4, 4) == 94);
  CHECK(min_sample_size(3, 5, 3) == 100);
  CHECK(min_sample_size(3, 4, 16) == 24);
  CHECK(min_sample_size(2, 2, 5) == 100);
  CHECK_THROWS(min_sample_size(3, 0, 4));
}

TEST_CASE("generated designs") {
  const auto g = generate_design(store_attributes(), 16, 4, 42);
  CHECK(g.diagnostics.duplicate_profiles == 0);
  CHECK(g.diagnostics.balance_deviation <= 1);
  const auto& d = g.design;
  for (std::size_t a = 0; a < d.attributes.size(); ++a) {
    std::array<int, 3> counts{};
    for (int t = 0; t < d.tasks; ++t)
      for (int j = 0; j < d.alternatives; ++j) ++counts[static_cast<std::size_t>(d.level(t, j, static_cast<int>(a)))];
    for (int c : counts) CHECK((c == 21 || c == 22));
  }
  const auto again = generate_design(store_attributes(), 16, 4, 42);
  CHECK(again.design.cells == d.cells);
  CHECK(generate_design(store_attributes(), 16, 4, 43).design.cells != d.cells);

  const auto tight = generate_design(store_attributes(), 16, 4, 42, DesignOptions{true});
  CHECK(tight.diagnostics.duplicate_profiles == 0);
  CHECK(tight.diagnostics.overlap_rate <= g.diagnostics.overlap_rate);

  CHECK_THROWS_AS(generate_design(store_attributes(), 16, 1, 1), ValidationError);
  // Fewer cells than levels cannot be balanced.
  CHECK_THROWS_AS(generate_design(store_attributes(), 1, 2, 1), ValidationError);
}

TEST_CASE("logit probabilities") {
  const std::vector<double> flat(4, 0.7);
  for (double p : choice_probabilities(flat)) CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
  const std::vector<double> dominant = {10.0, 0.0, 0.0, 0.0};
  CHECK(choice_probabilities(dominant)[0] > 0.9998);
  const std::vector<double> shifted = {1010.0, 1000.0, 1000.0, 1000.0};
  const auto a = choice_probabilities(dominant), b = choice_probabilities(shifted);
  for (std::size_t i = 0; i < 4; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("effects coding round trip") {
  const auto w = he_worths();
  const auto params = effects_parameters(design42(), w);
  CHECK(params.size() == 10);
  const auto back = expand_effects(design42(), params);
  for (std::size_t a = 0; a < w.size(); ++a) {
    double sum = 0.0;
    for (double v : back[a]) sum += v;
    CHECK(std::fabs(sum) < 1e-12);
    // The bundled worths are zero-sum to rounding, so the last level agrees loosely.
    for (std::size_t l = 0; l < 2; ++l) CHECK(back[a][l] == w[a][l]);
    CHECK(back[a][2] == doctest::Approx(w[a][2]).epsilon(1e-3).scale(1.0));
  }
}

TEST_CASE("gradient matches central differences") {
  const auto data = simulate_choices(design42(), he_worths(), 150, 7);
  Rng r(5);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> x(10);
    for (auto& v : x) v = r.uniform() - 0.5;
    const auto g = mnl_gradient(data, x);
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double h = 1e-5;
      auto up = x, down = x;
      up[k] += h;
      down[k] -= h;
      const double fd = (mnl_loglik(data, up) - mnl_loglik(data, down)) / (2 * h);
      CHECK(std::fabs(fd - g[k]) <= 1e-6 * std::max(1.0, std::fabs(g[k])) + 1e-5);
    }
  }
}

TEST_CASE("maximum likelihood fit") {
  const auto truth = he_worths();
  const auto data = simulate_choices(design42(), truth, 150, 42);
  const auto fit = fit_mnl(data);
  CHECK(fit.gradient_max_norm < 1e-8);
  for (double e : fit.hessian_eigenvalues) CHECK(e < 0.0);
  for (std::size_t i = 1; i < fit.loglik_trace.size(); ++i) CHECK(fit.loglik_trace[i] >= fit.loglik_trace[i - 1] - 1e-9);
  CHECK(fit.loglik >= mnl_loglik(data, effects_parameters(data.design, truth)));
  for (std::size_t a = 0; a < fit.worths.size(); ++a) {
    double sum = 0.0;
    for (std::size_t l = 0; l < 3; ++l) {
      sum += fit.worths[a][l];
      CHECK(fit.se[a][l] > 0.0);
      CHECK(fit.p[a][l] >= 0.0);
      CHECK(fit.p[a][l] <= 1.0);
    }
    CHECK(std::fabs(sum) < 1e-9);
  }
  // The strongest contrast is recovered with the right sign.
  CHECK(fit.worths[1][2] > fit.worths[1][0]);
  CHECK(fit.worths[4][0] > fit.worths[4][2]);
}

TEST_CASE("null preferences fit near zero") {
  Worths zero(5, std::vector<double>(3, 0.0));
  const auto data = simulate_choices(design42(), zero, 300, 11);
  const auto fit = fit_mnl(data);
  int outside = 0;
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t l = 0; l < 3; ++l) outside += std::fabs(fit.worths[a][l]) > 3.0 * fit.se[a][l];
  CHECK(outside <= 1);
}

TEST_CASE("csv round trips") {
  std::stringstream ds;
  write_design_csv(ds, design42());
  const auto d = read_design_csv(ds, "design");
  CHECK(d.cells == design42().cells);
  CHECK(d.tasks == 16);
  CHECK(d.alternatives == 4);

  const auto data = simulate_choices(design42(), he_worths(), 20, 3);
  std::stringstream cs;
  write_dataset_csv(cs, data);
  const auto back = read_dataset_csv(cs, "data");
  CHECK(back.respondents == 20);
  CHECK(back.chosen == data.chosen);
  CHECK(back.design.cells == data.design.cells);

  std::istringstream bad("task,alt,level_P\n1,1,4\n");
  CHECK_THROWS(read_design_csv(bad, "bad"));
}
