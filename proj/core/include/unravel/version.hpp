#pragma once

namespace unravel {
inline constexpr const char* kVersion = "0.1.0";
}
