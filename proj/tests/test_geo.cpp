#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "rabm/error.hpp"
#include "rabm/geo.hpp"
#include "rabm/rng.hpp"

using namespace rabm;

namespace {

// Central angle from unit vectors: atan2(|a x b|, a . b).
double vector_distance(const GeoPoint& p, const GeoPoint& q) {
  auto unit = [](const GeoPoint& g) {
    const double la = g.lat() * std::numbers::pi / 180.0, lo = g.lon() * std::numbers::pi / 180.0;
    return std::array<double, 3>{std::cos(la) * std::cos(lo), std::cos(la) * std::sin(lo), std::sin(la)};
  };
  const auto a = unit(p), b = unit(q);
  const std::array<double, 3> c = {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
  const double cross = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
  const double dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
  return kEarthRadiusKm * std::atan2(cross, dot);
}

GeoPoint random_point(Rng& r) { return {r.uniform() * 180.0 - 90.0, r.uniform() * 360.0 - 180.0}; }

}  // namespace

TEST_CASE("haversine reference distances") {
  CHECK(distance_km({0, 0}, {0, 0}) == 0.0);
  CHECK(std::fabs(distance_km({0, 0}, {1, 0}) - 111.195) < 0.001);
  CHECK(std::fabs(distance_km({0, 0}, {0, 180}) - 20015.1) < 0.1);
}

TEST_CASE("haversine agrees with the vector formula") {
  Rng r(5);
  for (int i = 0; i < 1000; ++i) {
    const GeoPoint a = random_point(r), b = random_point(r);
    CHECK(std::fabs(distance_km(a, b) - vector_distance(a, b)) < 1e-6);
  }
}

TEST_CASE("distance is a metric on random triples") {
  Rng r(9);
  for (int i = 0; i < 1000; ++i) {
    const GeoPoint a = random_point(r), b = random_point(r), c = random_point(r);
    CHECK(distance_km(a, b) == distance_km(b, a));
    CHECK(distance_km(a, a) == 0.0);
    CHECK(distance_km(a, c) <= distance_km(a, b) + distance_km(b, c) + 1e-9);
  }
}

TEST_CASE("geo points validate their range") {
  CHECK_THROWS_AS(GeoPoint(95, 0), ValidationError);
  CHECK_THROWS_AS(GeoPoint(0, 181), ValidationError);
  CHECK_THROWS_AS(GeoPoint(std::nan(""), 0), ValidationError);
}

TEST_CASE("site csv loading") {
  std::istringstream ok("id,kind,lat,lon\n1,household,22.5,88.3\n2,unorganized,22.51,88.31\n3,epharm,22.6,88.2\n");
  CHECK(read_sites(ok, "ok").size() == 3);

  std::istringstream empty("id,kind,lat,lon\n");
  CHECK(read_sites(empty, "empty").empty());

  std::istringstream bad("id,kind,lat,lon\n1,household,22.5,88.3\n2,organized,95,88.3\n");
  try {
    read_sites(bad, "bad.csv");
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("bad.csv:3") != std::string::npos);
  }

  std::istringstream dup("id,kind,lat,lon\n1,household,22.5,88.3\n1,organized,22.5,88.3\n");
  CHECK_THROWS(read_sites(dup, "dup"));
  std::istringstream kind("id,kind,lat,lon\n1,shop,22.5,88.3\n");
  CHECK_THROWS(read_sites(kind, "kind"));
}

TEST_CASE("site csv round trip") {
  TownParams p;
  p.households = 300;
  const auto sites = generate_town(p);
  std::ostringstream out;
  write_sites(out, sites);
  std::istringstream in(out.str());
  CHECK(read_sites(in, "rt") == sites);
}

TEST_CASE("town generation") {
  SUBCASE("default counts") {
    const auto sites = generate_town(TownParams{});
    const SiteCounts c = count_sites(sites);
    CHECK(sites.size() == 20170);
    CHECK(c.households == 20000);
    CHECK(c.retailers[0] == 159);
    CHECK(c.retailers[1] == 7);
    CHECK(c.retailers[2] == 4);
    for (std::size_t i = 0; i < sites.size(); ++i) CHECK(sites[i].id == static_cast<std::int64_t>(i) + 1);
  }
  SUBCASE("deterministic under seed") {
    TownParams p;
    p.households = 2000;
    std::ostringstream a, b;
    write_sites(a, generate_town(p));
    write_sites(b, generate_town(p));
    CHECK(a.str() == b.str());
    p.seed = 8;
    std::ostringstream c;
    write_sites(c, generate_town(p));
    CHECK(a.str() != c.str());
  }
  SUBCASE("no households") {
    TownParams p;
    p.households = 0;
    const auto sites = generate_town(p);
    CHECK(sites.size() == 170);
    for (const auto& s : sites) CHECK(s.kind != SiteKind::household);
  }
  SUBCASE("sites stay inside the extent") {
    TownParams p;
    p.households = 1000;
    const GeoPoint origin(p.origin_lat, p.origin_lon);
    for (const auto& s : generate_town(p)) CHECK(distance_km(origin, s.point) <= p.extent_km * std::sqrt(2.0) + 0.01);
  }
  SUBCASE("invalid counts") {
    TownParams p;
    p.unorganized = -1;
    CHECK_THROWS_AS(generate_town(p), ValidationError);
  }
}

TEST_CASE("nearest retailer per channel") {
  const GeoPoint home(22.5, 88.3);
  SUBCASE("one retailer per channel") {
    const std::vector<SiteRecord> sites = {{1, SiteKind::household, home},
                                           {2, SiteKind::unorganized, {22.51, 88.3}},
                                           {3, SiteKind::organized, {22.52, 88.3}},
                                           {4, SiteKind::epharm, {22.6, 88.3}}};
    const auto n = nearest_per_channel(home, sites);
    CHECK(n[0]->id == 2);
    CHECK(n[1]->id == 3);
    CHECK(n[2]->id == 4);
    CHECK(n[0]->km == doctest::Approx(distance_km(home, {22.51, 88.3})));
  }
  SUBCASE("equidistant stores go to the lower id") {
    const std::vector<SiteRecord> same = {{9, SiteKind::unorganized, {22.51, 88.3}},
                                          {5, SiteKind::unorganized, {22.51, 88.3}}};
    CHECK(nearest_per_channel(home, same)[0]->id == 5);
  }
  SUBCASE("dead stores are skipped and empty channels are absent") {
    const std::vector<SiteRecord> sites = {{2, SiteKind::unorganized, {22.51, 88.3}},
                                           {3, SiteKind::unorganized, {22.55, 88.3}},
                                           {4, SiteKind::organized, {22.52, 88.3}}};
    const auto n = nearest_per_channel(home, sites, [](std::int64_t id) { return id != 2 && id != 4; });
    CHECK(n[0]->id == 3);
    CHECK_FALSE(n[1].has_value());
    CHECK_FALSE(n[2].has_value());
  }
}
