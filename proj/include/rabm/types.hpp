#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace rabm {

enum class Channel : std::uint8_t { unorganized = 0, organized = 1, epharm = 2 };

inline constexpr std::array<Channel, 3> kChannels = {Channel::unorganized, Channel::organized,
                                                     Channel::epharm};

constexpr std::size_t index_of(Channel c) { return static_cast<std::size_t>(c); }

std::string_view to_string(Channel c);

/// Attribute level as binned in the attribute table: L1 is the lowest bin.
enum class Level : std::uint8_t { L1 = 0, L2 = 1, L3 = 2 };

inline constexpr std::array<Level, 3> kLevels = {Level::L1, Level::L2, Level::L3};

constexpr std::size_t index_of(Level l) { return static_cast<std::size_t>(l); }

/// "L", "M" or "H".
std::string_view level_letter(Level l);

/// Accepts L/M/H (any case) or 1/2/3.
Level parse_level(std::string_view text);

enum class Attribute : std::uint8_t {
  price_discount = 0,
  quality = 1,
  assortment = 2,
  service = 3,
  distance = 4,
  emergency = 5,
};

/// The five attributes that carry part-worths (emergency selects the table instead).
inline constexpr std::array<Attribute, 5> kWorthAttributes = {
    Attribute::price_discount, Attribute::quality, Attribute::assortment, Attribute::service,
    Attribute::distance};

constexpr std::size_t index_of(Attribute a) { return static_cast<std::size_t>(a); }

std::string_view to_string(Attribute a);
Attribute parse_attribute(std::string_view text);

/// Degree of emergency bucket. Ordered like the levels: low = L1.
enum class Emergency : std::uint8_t { low = 0, medium = 1, high = 2 };

inline constexpr std::array<Emergency, 3> kEmergencies = {Emergency::low, Emergency::medium,
                                                          Emergency::high};

constexpr std::size_t index_of(Emergency e) { return static_cast<std::size_t>(e); }
constexpr Emergency emergency_of(Level l) { return static_cast<Emergency>(l); }

/// "LE", "ME", "HE".
std::string_view to_string(Emergency e);
Emergency parse_emergency(std::string_view text);

}  // namespace rabm
