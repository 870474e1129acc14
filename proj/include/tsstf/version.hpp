#pragma once

namespace tsstf {
inline constexpr const char* kVersion = "0.1.0";
}
