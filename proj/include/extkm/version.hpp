#pragma once

namespace extkm {

inline constexpr const char* version = "0.1.0";

} // namespace extkm
