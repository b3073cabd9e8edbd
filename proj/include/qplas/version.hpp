#pragma once

namespace qplas {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qplas
