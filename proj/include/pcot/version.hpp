#pragma once

namespace pcot {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pcot
