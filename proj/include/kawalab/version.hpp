#pragma once

namespace kawalab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace kawalab
