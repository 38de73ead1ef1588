#pragma once

#include <filesystem>

#include "rabm/config.hpp"

namespace test {

inline std::filesystem::path data_dir() { return RABM_TEST_DATA_DIR; }
inline std::filesystem::path fixture_dir() { return RABM_TEST_FIXTURE_DIR; }

}  // namespace test
