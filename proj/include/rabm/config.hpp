#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rabm/engine.hpp"
#include "rabm/geo.hpp"

namespace rabm {

using KeyValues = std::map<std::string, std::string, std::less<>>;

/// `key = value` lines; `#` starts a comment; blank lines ignored. Duplicate keys and
/// lines without `=` are ParseErrors carrying the line number.
KeyValues parse_key_values(std::istream& in, std::string_view source);

/// RETAIL_ABM_DATA when set, otherwise the data directory of the source tree.
std::filesystem::path default_data_dir();

/// A fully resolved simulation setup.
struct Setup {
  ScenarioConfig scenario;
  TownParams town;
  std::optional<std::filesystem::path> sites_file;  // empty: generate the town
  std::filesystem::path partworths_dir;
  std::filesystem::path diseases_file;
  CalendarOptions calendar;
  /// Every recognised key with its effective value (defaults filled in).
  KeyValues resolved;

  std::vector<std::filesystem::path> input_files() const;
};

/// Builds a setup from key/values. Keys in `required_keys()` must be present; unknown
/// keys are rejected. Relative paths resolve against `base_dir`. Loads the part-worth
/// tables and disease calendar; the town is built separately.
Setup resolve_setup(const KeyValues& values, const std::filesystem::path& base_dir);

/// Reads a config file, applies `overrides` on top, and resolves it.
Setup load_setup(const std::filesystem::path& path, const KeyValues& overrides = {});

const std::vector<std::string>& required_keys();

/// Generates or loads the sites and precomputes the spatial index. The demand calendar
/// is rebuilt for the actual household count.
std::shared_ptr<const Town> build_town(Setup& setup);

}  // namespace rabm
