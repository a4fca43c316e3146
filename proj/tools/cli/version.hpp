#pragma once

namespace l96::cli {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace l96::cli
