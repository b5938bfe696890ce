#pragma once

namespace survsim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace survsim
