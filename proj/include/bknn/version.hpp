#pragma once

namespace bknn {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bknn
