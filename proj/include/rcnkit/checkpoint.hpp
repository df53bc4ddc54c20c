#pragma once

#include <string>

#include "rcnkit/tensor.hpp"

namespace rcnkit {

// Binary parameter container. Layout: magic "RCNK", format version (u32),
// entry count (u32), then per entry: name length (u16) + UTF-8 name, the
// four shape extents as u32, and the payload as little-endian float32.
// All multi-byte integers are little-endian. Round-trips are bit-exact.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const ParameterStore& store, const std::string& path);
ParameterStore load_checkpoint(const std::string& path);

}  // namespace rcnkit
