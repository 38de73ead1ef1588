#pragma once

namespace rabm {
inline constexpr const char* kVersion = "0.1.0";
}
