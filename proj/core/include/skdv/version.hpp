#pragma once

namespace skdv {

inline constexpr int version_major = 0;
inline constexpr int version_minor = 1;
inline constexpr int version_patch = 0;
inline constexpr const char* version_string = "0.1.0";

// Bump when the config key schema changes incompatibly.
inline constexpr int config_schema_version = 1;

// Bump when the seed-stream derivation rule changes; recorded in manifests
// so a replay can refuse mismatched rules.
inline constexpr const char* seed_rule = "splitmix64-v1";

// Binary trajectory frame format version.
inline constexpr int frame_format_version = 1;

}  // namespace skdv
