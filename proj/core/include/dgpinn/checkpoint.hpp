#pragma once

#include "dgpinn/mlp.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace dgpinn {

/// A persisted TrainableState together with the problem it was trained on.
///
/// Byte layout (all integers unsigned little-endian), see docs/file_formats.md:
///   "DGPN1" | u32 len, problem name | u32 L, L x u32 widths |
///   u32 K, K x (u32 len, name) | u64 count | count x f64 (flat state)
struct Checkpoint {
  std::string problem;
  TrainableState state;
};

inline constexpr char kCheckpointMagic[] = "DGPN1";

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

/// Throws ConfigError on a bad magic, truncated stream, trailing bytes or
/// inconsistent shapes.
Checkpoint read_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dgpinn
