#pragma once

namespace hrmt {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hrmt
