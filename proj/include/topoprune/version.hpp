#pragma once

namespace topoprune {

inline constexpr const char* kVersion = "0.1.0";

} // namespace topoprune
