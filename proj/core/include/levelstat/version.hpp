#pragma once

namespace levelstat {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace levelstat
