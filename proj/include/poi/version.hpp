#pragma once

namespace poi {

inline constexpr const char* kToolName = "poikit";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace poi
