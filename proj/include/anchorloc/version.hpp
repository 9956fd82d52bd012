#pragma once

namespace anchorloc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace anchorloc
