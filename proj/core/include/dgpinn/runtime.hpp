#pragma once

namespace dgpinn {

/// Keeps large freed blocks in the heap instead of returning them to the OS.
/// Tape values are multi-megabyte matrices allocated and freed every
/// iteration; without this each one costs fresh page faults. Call once at
/// startup of an executable; a no-op outside glibc.
void tune_allocator();

}  // namespace dgpinn
