#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "layoutpref/policy.hpp"

namespace layoutpref {

/// Binary layout (little-endian):
///   "LAYPOLCY" magic, u32 format version, u32 bins, u32 feature dim,
///   f64 sampling temperature, then per head (x, y, w, h): the
///   (bins + 1) x feature-dim weight matrix row-major, then bins + 1 biases.
inline constexpr char kCheckpointMagic[8] = {'L', 'A', 'Y', 'P', 'O', 'L', 'C', 'Y'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Sidecar text manifest (`key=value` per line, keys sorted) stored next to
/// the checkpoint as `<path>.manifest`.
using Manifest = std::map<std::string, std::string>;

std::filesystem::path manifest_path(const std::filesystem::path& checkpoint);

void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params,
                     const Manifest& manifest = {});
PolicyParams load_checkpoint(const std::filesystem::path& path);
/// Empty when the sidecar does not exist.
Manifest load_manifest(const std::filesystem::path& checkpoint);

}  // namespace layoutpref
