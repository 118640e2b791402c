#pragma once

namespace rpk {
inline constexpr const char* version = "0.1.0";
}
