#pragma once

namespace rdkmc {
inline constexpr const char* version = "0.1.0";
}
