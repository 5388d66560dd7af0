#pragma once

namespace visrank {

inline constexpr const char* kVersion = "0.1.0";

// Magic strings of the on-disk model formats.
inline constexpr const char* kUlmMagic = "ULM1";
inline constexpr const char* kTdpMagic = "TDP1";

}  // namespace visrank
