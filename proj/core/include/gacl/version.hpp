#pragma once

namespace gacl {

inline constexpr const char* kToolName = "gacl";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace gacl
