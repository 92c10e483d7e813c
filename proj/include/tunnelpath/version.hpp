#pragma once

namespace tunnelpath {

inline constexpr const char* version = "0.1.0";

}  // namespace tunnelpath
