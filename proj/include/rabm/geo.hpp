#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rabm/types.hpp"

namespace rabm {

inline constexpr double kEarthRadiusKm = 6371.0;

/// Latitude/longitude in degrees. Construction validates range and finiteness.
class GeoPoint {
 public:
  GeoPoint(double lat, double lon);

  double lat() const { return lat_; }
  double lon() const { return lon_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

 private:
  double lat_;
  double lon_;
};

/// Haversine great-circle distance in kilometres.
double distance_km(const GeoPoint& a, const GeoPoint& b);

enum class SiteKind : std::uint8_t { household, unorganized, organized, epharm };

std::string_view to_string(SiteKind kind);
SiteKind parse_site_kind(std::string_view text);

/// Retail channel of a retailer site; nullopt for households.
std::optional<Channel> channel_of(SiteKind kind);

struct SiteRecord {
  std::int64_t id = 0;
  SiteKind kind = SiteKind::household;
  GeoPoint point{0.0, 0.0};

  friend bool operator==(const SiteRecord&, const SiteRecord&) = default;
};

/// Parses the site CSV (`id,kind,lat,lon`). Duplicate ids and out-of-range
/// coordinates are rejected with the offending line number.
std::vector<SiteRecord> read_sites(std::istream& in, std::string_view source);
std::vector<SiteRecord> load_sites(const std::filesystem::path& path);

void write_sites(std::ostream& out, std::span<const SiteRecord> sites);
void save_sites(const std::filesystem::path& path, std::span<const SiteRecord> sites);

struct SiteCounts {
  std::size_t households = 0;
  std::array<std::size_t, 3> retailers{};  // by Channel
};

SiteCounts count_sites(std::span<const SiteRecord> sites);

/// Parameters of the synthetic town. The town is an `extent_km` square whose
/// south-west corner sits at (origin_lat, origin_lon).
struct TownParams {
  long long households = 20000;
  long long unorganized = 159;
  long long organized = 7;
  long long epharm = 4;
  double extent_km = 10.0;
  long long clusters = 12;
  /// Centroid-relaxation passes that even out unorganized store catchments (0 = none).
  long long store_spacing_iterations = 10;
  std::uint64_t seed = 7;
  double origin_lat = 22.35;
  double origin_lon = 88.25;
};

/// Households come from a mixture of Gaussian clusters clipped to the extent;
/// unorganized stores start next to randomly drawn households (so their density
/// follows settlement) and are then relaxed towards the centroids of their nearest
/// households, organized stores next to the most populous cluster
/// centres, e-pharmacy depots on the extent boundary. Ids are assigned in that
/// order starting at 1.
std::vector<SiteRecord> generate_town(const TownParams& params);

struct NearestHit {
  std::int64_t id = 0;
  double km = 0.0;

  friend bool operator==(const NearestHit&, const NearestHit&) = default;
};

using NearestByChannel = std::array<std::optional<NearestHit>, 3>;

/// For each channel, the alive retailer closest to `customer` (ties go to the lower id).
/// Channels with no alive retailer are left empty.
NearestByChannel nearest_per_channel(
    const GeoPoint& customer, std::span<const SiteRecord> sites,
    const std::function<bool(std::int64_t)>& alive = [](std::int64_t) { return true; });

}  // namespace rabm
