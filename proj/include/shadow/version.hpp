#pragma once

namespace shadow {

inline constexpr const char* kVersion = "0.1.0";

} // namespace shadow
