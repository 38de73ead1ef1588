#include "rabm/geo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <string>
#include <unordered_set>

#include "rabm/error.hpp"
#include "rabm/io.hpp"
#include "rabm/rng.hpp"

namespace rabm {

GeoPoint::GeoPoint(double lat, double lon) : lat_(lat), lon_(lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon) || lat < -90.0 || lat > 90.0 || lon < -180.0 ||
      lon > 180.0) {
    throw ValidationError("coordinate out of range: lat=" + format_double(lat) +
                          " lon=" + format_double(lon));
  }
}

double distance_km(const GeoPoint& a, const GeoPoint& b) {
  constexpr double rad = std::numbers::pi / 180.0;
  const double dlat = (b.lat() - a.lat()) * rad;
  const double dlon = (b.lon() - a.lon()) * rad;
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  double h = s1 * s1 + std::cos(a.lat() * rad) * std::cos(b.lat() * rad) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

std::string_view to_string(SiteKind kind) {
  switch (kind) {
    case SiteKind::household: return "household";
    case SiteKind::unorganized: return "unorganized";
    case SiteKind::organized: return "organized";
    case SiteKind::epharm: return "epharm";
  }
  return "?";
}

SiteKind parse_site_kind(std::string_view text) {
  if (text == "household") return SiteKind::household;
  if (text == "unorganized") return SiteKind::unorganized;
  if (text == "organized") return SiteKind::organized;
  if (text == "epharm") return SiteKind::epharm;
  throw ParseError("unknown site kind '" + std::string(text) + "'");
}

std::optional<Channel> channel_of(SiteKind kind) {
  switch (kind) {
    case SiteKind::household: return std::nullopt;
    case SiteKind::unorganized: return Channel::unorganized;
    case SiteKind::organized: return Channel::organized;
    case SiteKind::epharm: return Channel::epharm;
  }
  return std::nullopt;
}

std::vector<SiteRecord> read_sites(std::istream& in, std::string_view source) {
  const CsvTable table = read_csv(in, source);
  const std::vector<std::string> expected{"id", "kind", "lat", "lon"};
  if (table.header != expected)
    throw ParseError(std::string(source) + ":1: header must be 'id,kind,lat,lon'");

  std::vector<SiteRecord> sites;
  sites.reserve(table.rows.size());
  std::unordered_set<std::int64_t> seen;
  for (const auto& row : table.rows) {
    const std::string where = std::string(source) + ":" + std::to_string(row.line) + ": ";
    try {
      const auto id = static_cast<std::int64_t>(parse_int(row.fields[0]));
      const SiteKind kind = parse_site_kind(row.fields[1]);
      const double lat = parse_double(row.fields[2]);
      const double lon = parse_double(row.fields[3]);
      if (!seen.insert(id).second) throw ValidationError("duplicate id " + std::to_string(id));
      sites.push_back({id, kind, GeoPoint(lat, lon)});
    } catch (const ParseError& e) {
      throw ParseError(where + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  }
  return sites;
}

std::vector<SiteRecord> load_sites(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_sites(in, path.string());
}

void write_sites(std::ostream& out, std::span<const SiteRecord> sites) {
  out << "id,kind,lat,lon\n";
  for (const auto& s : sites) {
    out << s.id << ',' << to_string(s.kind) << ',' << format_double(s.point.lat()) << ','
        << format_double(s.point.lon()) << '\n';
  }
}

void save_sites(const std::filesystem::path& path, std::span<const SiteRecord> sites) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  write_sites(out, sites);
}

SiteCounts count_sites(std::span<const SiteRecord> sites) {
  SiteCounts counts;
  for (const auto& s : sites) {
    if (auto ch = channel_of(s.kind))
      ++counts.retailers[index_of(*ch)];
    else
      ++counts.households;
  }
  return counts;
}

namespace {

constexpr double kKmPerDegree = kEarthRadiusKm * std::numbers::pi / 180.0;

struct Planar {
  double x;
  double y;
};

class TownFrame {
 public:
  explicit TownFrame(const TownParams& p)
      : p_(p), km_per_deg_lon_(kKmPerDegree * std::cos(p.origin_lat * std::numbers::pi / 180.0)) {}

  GeoPoint to_geo(Planar q) const {
    return GeoPoint(p_.origin_lat + q.y / kKmPerDegree, p_.origin_lon + q.x / km_per_deg_lon_);
  }

  Planar clamp(Planar q) const {
    return {std::clamp(q.x, 0.0, p_.extent_km), std::clamp(q.y, 0.0, p_.extent_km)};
  }

  bool inside(Planar q) const {
    return q.x >= 0.0 && q.y >= 0.0 && q.x <= p_.extent_km && q.y <= p_.extent_km;
  }

 private:
  const TownParams& p_;
  double km_per_deg_lon_;
};

struct Cluster {
  Planar centre;
  double sigma;
  double weight;
};

// Lloyd iterations: each store moves to the centroid of the homes nearest to it.
void relax_towards_catchments(std::vector<Planar>& stores, const std::vector<Planar>& homes,
                              long long iterations) {
  if (stores.empty() || homes.empty()) return;
  std::vector<double> sx(stores.size()), sy(stores.size());
  std::vector<long long> count(stores.size());
  for (long long it = 0; it < iterations; ++it) {
    std::fill(sx.begin(), sx.end(), 0.0);
    std::fill(sy.begin(), sy.end(), 0.0);
    std::fill(count.begin(), count.end(), 0);
    for (const Planar& h : homes) {
      std::size_t best = 0;
      double best_d2 = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < stores.size(); ++k) {
        const double dx = stores[k].x - h.x, dy = stores[k].y - h.y;
        const double d2 = dx * dx + dy * dy;
        if (d2 < best_d2) {
          best_d2 = d2;
          best = k;
        }
      }
      sx[best] += h.x;
      sy[best] += h.y;
      ++count[best];
    }
    for (std::size_t k = 0; k < stores.size(); ++k)
      if (count[k] > 0) stores[k] = {sx[k] / static_cast<double>(count[k]), sy[k] / static_cast<double>(count[k])};
  }
}

}  // namespace

std::vector<SiteRecord> generate_town(const TownParams& p) {
  if (p.households < 0 || p.unorganized < 0 || p.organized < 0 || p.epharm < 0 || p.clusters < 0 ||
      p.store_spacing_iterations < 0)
    throw ValidationError("town counts must be non-negative");
  if (!(p.extent_km > 0.0) || !std::isfinite(p.extent_km))
    throw ValidationError("town extent must be positive");

  Rng rng(p.seed);
  const TownFrame frame(p);
  const double e = p.extent_km;

  std::vector<Cluster> clusters;
  const long long n_clusters = std::max<long long>(p.clusters, 1);
  for (long long k = 0; k < n_clusters; ++k) {
    Cluster c;
    c.centre = {e * (0.1 + 0.8 * rng.uniform()), e * (0.1 + 0.8 * rng.uniform())};
    c.sigma = e * (0.03 + 0.07 * rng.uniform());
    c.weight = 0.3 + rng.uniform();
    clusters.push_back(c);
  }
  std::vector<double> cumulative;
  double total_weight = 0.0;
  for (const auto& c : clusters) cumulative.push_back(total_weight += c.weight);

  auto draw_cluster = [&]() -> std::size_t {
    const double u = rng.uniform() * total_weight;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                                 clusters.size() - 1);
  };
  auto gaussian_around = [&](Planar centre, double sigma) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      Planar q{centre.x + sigma * rng.normal(), centre.y + sigma * rng.normal()};
      if (frame.inside(q)) return q;
    }
    return frame.clamp(centre);
  };

  std::vector<SiteRecord> sites;
  sites.reserve(static_cast<std::size_t>(p.households + p.unorganized + p.organized + p.epharm));
  std::int64_t next_id = 1;

  std::vector<Planar> homes;
  std::vector<long long> cluster_population(clusters.size(), 0);
  homes.reserve(static_cast<std::size_t>(p.households));
  for (long long i = 0; i < p.households; ++i) {
    const std::size_t k = draw_cluster();
    ++cluster_population[k];
    const Planar q = gaussian_around(clusters[k].centre, clusters[k].sigma);
    homes.push_back(q);
    sites.push_back({next_id++, SiteKind::household, frame.to_geo(q)});
  }

  // Unorganized stores: a short walk from a random household, so store density tracks settlement,
  // then spread towards the centroid of the households they are closest to.
  std::vector<Planar> stores;
  for (long long i = 0; i < p.unorganized; ++i) {
    Planar anchor;
    if (!homes.empty()) {
      anchor = homes[rng.below(homes.size())];
    } else {
      anchor = clusters[draw_cluster()].centre;
    }
    stores.push_back(gaussian_around(anchor, 0.1));
  }
  relax_towards_catchments(stores, homes, p.store_spacing_iterations);
  for (const Planar& q : stores) sites.push_back({next_id++, SiteKind::unorganized, frame.to_geo(q)});

  // Organized stores: next to the most populous clusters, one per cluster in rank order.
  std::vector<std::size_t> rank(clusters.size());
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
    if (cluster_population[a] != cluster_population[b])
      return cluster_population[a] > cluster_population[b];
    return clusters[a].weight > clusters[b].weight;
  });
  for (long long i = 0; i < p.organized; ++i) {
    const auto& c = clusters[rank[static_cast<std::size_t>(i) % rank.size()]];
    const Planar q = gaussian_around(c.centre, 0.2);
    sites.push_back({next_id++, SiteKind::organized, frame.to_geo(q)});
  }

  // E-pharmacy depots: spread around the boundary, one per side in turn.
  for (long long i = 0; i < p.epharm; ++i) {
    const double t = e * rng.uniform();
    Planar q{};
    switch (i % 4) {
      case 0: q = {t, 0.0}; break;
      case 1: q = {e, t}; break;
      case 2: q = {t, e}; break;
      default: q = {0.0, t}; break;
    }
    sites.push_back({next_id++, SiteKind::epharm, frame.to_geo(q)});
  }
  return sites;
}

NearestByChannel nearest_per_channel(const GeoPoint& customer, std::span<const SiteRecord> sites,
                                     const std::function<bool(std::int64_t)>& alive) {
  NearestByChannel best;
  for (const auto& s : sites) {
    const auto ch = channel_of(s.kind);
    if (!ch || !alive(s.id)) continue;
    const double km = distance_km(customer, s.point);
    auto& slot = best[index_of(*ch)];
    if (!slot || km < slot->km || (km == slot->km && s.id < slot->id)) slot = NearestHit{s.id, km};
  }
  return best;
}

}  // namespace rabm
