#pragma once

namespace arw {

inline constexpr const char* kVersionTag = "arw-lab v1";
inline constexpr const char* kVersion = "1.0.0";

} // namespace arw
