#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rabm/choice.hpp"
#include "rabm/error.hpp"
#include "rabm/rng.hpp"
#include "support.hpp"

using namespace rabm;

namespace {

const PartWorthSet& bundled() {
  static const PartWorthSet set = load_partworth_set(test::data_dir());
  return set;
}

RetailerProfile profile(Channel c, Level d, Level q, Level a, Level s) { return {c, d, q, a, s}; }

}  // namespace

TEST_CASE("attribute binning") {
  CHECK(classify(Attribute::price_discount, 0.0) == Level::L1);
  CHECK(classify(Attribute::price_discount, 9.999) == Level::L1);
  CHECK(classify(Attribute::price_discount, 10.0) == Level::L2);
  CHECK(classify(Attribute::price_discount, 20.0) == Level::L2);
  CHECK(classify(Attribute::price_discount, 20.001) == Level::L3);
  CHECK(classify(Attribute::price_discount, 100.0) == Level::L3);
  CHECK(classify(Attribute::quality, 0.39) == Level::L1);
  CHECK(classify(Attribute::quality, 0.4) == Level::L2);
  CHECK(classify(Attribute::quality, 0.7) == Level::L3);
  CHECK(classify(Attribute::quality, 1.0) == Level::L3);
  CHECK(classify(Attribute::distance, 2.0) == Level::L1);
  CHECK(classify(Attribute::distance, 2.01) == Level::L2);
  CHECK(classify(Attribute::distance, 10.0) == Level::L2);
  CHECK(classify(Attribute::distance, 10.5) == Level::L3);
  CHECK(emergency_of(classify(Attribute::emergency, 0.4)) == Emergency::medium);
  CHECK(emergency_of(classify(Attribute::emergency, 0.7)) == Emergency::high);
  CHECK_THROWS_AS(classify(Attribute::quality, 1.2), ValidationError);
  CHECK_THROWS_AS(classify(Attribute::price_discount, -1.0), ValidationError);
  CHECK_THROWS_AS(classify(Attribute::distance, -0.1), ValidationError);
}

TEST_CASE("bundled part-worth tables are effects coded") {
  for (auto e : kEmergencies) {
    CHECK(bundled()[e].emergency == e);
    CHECK(max_zero_sum_deviation(bundled()[e]) < 1e-3);
  }
  CHECK(bundled()[Emergency::high].at(Attribute::distance, Level::L3) == -0.73678);
}

TEST_CASE("utility hand sums") {
  const auto& he = bundled()[Emergency::high];
  const ChoiceParams params;
  const auto shop = profile(Channel::unorganized, Level::L3, Level::L3, Level::L3, Level::L2);
  CHECK(utility(1.0, shop, he, params) == doctest::Approx(0.12566 + 0.68198 + 0.08497 + 0.03511 + 0.66468));
  CHECK(utility(1.0, shop, he, params) == doctest::Approx(1.59240).epsilon(1e-9));

  ChoiceParams flat = params;
  flat.mobility_exponent = 0.0;
  CHECK(utility(0.5, shop, he, flat) == doctest::Approx(1.59240));
  CHECK(utility(1.5, shop, he, flat) == doctest::Approx(1.59240));

  // Closer than the floor counts as the floor.
  CHECK(utility(0.01, shop, he, params) == doctest::Approx(1.59240 / std::sqrt(0.1)));

  const auto online = profile(Channel::epharm, Level::L3, Level::L3, Level::L3, Level::L2);
  const double sum = 0.12566 + 0.68198 + 0.08497 + 0.03511 - 0.73678;
  CHECK(effective_distance(Channel::epharm, 3.0, params) == 10.0);
  CHECK(distance_level(Channel::epharm, 10.0) == Level::L3);
  CHECK(utility(3.0, online, he, params) == doctest::Approx(sum / std::sqrt(10.0)));
}

TEST_CASE("choose picks the argmax with channel precedence") {
  PartWorthTable t;  // all zeros except the distance row, which sets the utilities
  t.worth[index_of(Attribute::distance)] = {1.2, 0.0, 0.0};
  ChoiceParams flat;
  flat.mobility_exponent = 0.0;
  const auto u = profile(Channel::unorganized, Level::L1, Level::L1, Level::L1, Level::L1);
  const auto o = profile(Channel::organized, Level::L1, Level::L1, Level::L1, Level::L1);
  const auto e = profile(Channel::epharm, Level::L1, Level::L1, Level::L1, Level::L1);

  SUBCASE("plain argmax") {
    PartWorthTable a;
    a.worth[index_of(Attribute::price_discount)] = {1.2, 0.9, 0.1};
    const std::vector<Candidate> c = {{profile(Channel::unorganized, Level::L1, Level::L1, Level::L1, Level::L1), 1, 1.0},
                                      {profile(Channel::organized, Level::L2, Level::L1, Level::L1, Level::L1), 2, 1.0},
                                      {profile(Channel::epharm, Level::L3, Level::L1, Level::L1, Level::L1), 3, 1.0}};
    const auto r = choose(c, a, flat);
    CHECK(r.channel == Channel::unorganized);
    CHECK(r.retailer_id == 1);
  }
  SUBCASE("ties go to unorganized, then organized") {
    const std::vector<Candidate> c = {{e, 3, 1.0}, {o, 2, 1.0}, {u, 1, 1.0}};
    CHECK(choose(c, t, flat).channel == Channel::unorganized);
    const std::vector<Candidate> c2 = {{e, 3, 1.0}, {o, 2, 1.0}};
    CHECK(choose(c2, t, flat).channel == Channel::organized);
    const std::vector<Candidate> c3 = {{u, 8, 1.0}, {u, 4, 1.0}};
    CHECK(choose(c3, t, flat).retailer_id == 4);
  }
  SUBCASE("negative utilities still compare") {
    PartWorthTable neg;
    neg.worth[index_of(Attribute::price_discount)] = {-1.0, -0.8, -0.1};
    const std::vector<Candidate> c = {{profile(Channel::unorganized, Level::L1, Level::L1, Level::L1, Level::L1), 1, 1.0},
                                      {profile(Channel::organized, Level::L2, Level::L1, Level::L1, Level::L1), 2, 1.0},
                                      {profile(Channel::epharm, Level::L3, Level::L1, Level::L1, Level::L1), 3, 1.0}};
    const auto r = choose(c, neg, flat);
    CHECK(r.channel == Channel::epharm);
    CHECK(r.utility < 0.0);
  }
  SUBCASE("empty candidate list") { CHECK_THROWS_AS(choose({}, t, flat), ContractError); }
}

TEST_CASE("argmax is invariant to positive scaling of the worths") {
  Rng r(21);
  const ChoiceParams params;
  for (int trial = 0; trial < 500; ++trial) {
    PartWorthTable t = bundled()[kEmergencies[r.below(3)]];
    std::vector<Candidate> c;
    for (auto ch : kChannels)
      c.push_back({profile(ch, kLevels[r.below(3)], kLevels[r.below(3)], kLevels[r.below(3)], kLevels[r.below(3)]),
                   static_cast<std::int64_t>(index_of(ch)) + 1, 0.05 + 15.0 * r.uniform()});
    const auto before = choose(c, t, params);
    const double k = 0.1 + 10.0 * r.uniform();
    for (auto& row : t.worth)
      for (auto& v : row) v *= k;
    const auto after = choose(c, t, params);
    CHECK(before.channel == after.channel);
    CHECK(before.retailer_id == after.retailer_id);
  }
}

TEST_CASE("utility is monotone in distance within a distance bin") {
  const auto& le = bundled()[Emergency::low];
  const ChoiceParams params;
  Rng r(4);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = profile(Channel::unorganized, kLevels[r.below(3)], kLevels[r.below(3)], kLevels[r.below(3)],
                           kLevels[r.below(3)]);
    // Inside (2, 10] the level is fixed.
    const double d1 = 2.01 + 7.9 * r.uniform(), d2 = 2.01 + 7.9 * r.uniform();
    const double lo = std::min(d1, d2), hi = std::max(d1, d2);
    const double sum = utility(5.0, p, le, ChoiceParams{0.0, 0.1, 10.0});
    if (sum > 0) CHECK(utility(lo, p, le, params) >= utility(hi, p, le, params));
    if (sum < 0) CHECK(utility(lo, p, le, params) <= utility(hi, p, le, params));
  }
}

TEST_CASE("relative importance") {
  const auto& he = bundled()[Emergency::high];
  const auto imp = relative_importance(he);
  // Range of each attribute over the sum of ranges.
  double total = 0.0;
  std::array<double, 5> range{};
  for (std::size_t a = 0; a < 5; ++a) {
    const auto& w = he.worth[a];
    range[a] = *std::max_element(w.begin(), w.end()) - *std::min_element(w.begin(), w.end());
    total += range[a];
  }
  double sum = 0.0;
  for (std::size_t a = 0; a < 5; ++a) {
    CHECK(imp[a] == doctest::Approx(100.0 * range[a] / total));
    sum += imp[a];
  }
  CHECK(sum == doctest::Approx(100.0));
  CHECK(imp[index_of(Attribute::distance)] > imp[index_of(Attribute::quality)]);
  CHECK(imp[index_of(Attribute::quality)] > imp[index_of(Attribute::price_discount)]);

  PartWorthTable flat;
  for (auto& row : flat.worth) row = {-1.0, 0.0, 1.0};
  for (double v : relative_importance(flat)) CHECK(v == doctest::Approx(20.0));
  flat.worth[2] = {0.0, 0.0, 0.0};
  CHECK(relative_importance(flat)[2] == 0.0);
}

TEST_CASE("part-worth csv validation") {
  std::istringstream missing("emergency,attribute,level,worth,se\nHE,quality,1,0.1,0.01\n");
  CHECK_THROWS(read_partworths(missing, "missing"));
  std::istringstream mixed(
      "emergency,attribute,level,worth,se\nHE,quality,1,0.1,0.01\nLE,quality,2,0.1,0.01\n");
  CHECK_THROWS(read_partworths(mixed, "mixed"));
}
