#pragma once

namespace sise {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sise
