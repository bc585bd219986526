#pragma once

namespace aqmsim {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace aqmsim
