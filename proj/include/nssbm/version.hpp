#pragma once

namespace nssbm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace nssbm
