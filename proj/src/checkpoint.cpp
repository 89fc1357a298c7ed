#include "layoutpref/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "layoutpref/error.hpp"

namespace layoutpref {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(ErrorCode::kParseError, "truncated checkpoint " + path.string());
  return value;
}

}  // namespace

std::filesystem::path manifest_path(const std::filesystem::path& checkpoint) {
  auto p = checkpoint;
  p += ".manifest";
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params,
                     const Manifest& manifest) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write checkpoint " + path.string());
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.bins()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(kFeatureDim));
  put<double>(out, params.sampling_temperature);
  for (std::size_t h = 0; h < kNumHeads; ++h) {
    for (std::size_t k = 0; k < params.vocab(); ++k) {
      const auto row = params.row(h, k);
      for (std::size_t j = 0; j < kFeatureDim; ++j) put<double>(out, row[j]);
    }
    for (std::size_t k = 0; k < params.vocab(); ++k) put<double>(out, params.row(h, k)[kFeatureDim]);
  }
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());

  std::ofstream side(manifest_path(path), std::ios::trunc);
  if (!side) throw Error(ErrorCode::kIoError, "cannot write manifest for " + path.string());
  side << "format_version=" << kCheckpointVersion << "\n";
  for (const auto& [key, value] : manifest) {
    if (key == "format_version") continue;
    side << key << "=" << value << "\n";
  }
}

PolicyParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open checkpoint " + path.string());
  char magic[sizeof kCheckpointMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw Error(ErrorCode::kParseError, path.string() + " is not a policy checkpoint");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kParseError, "unsupported checkpoint version " + std::to_string(version));
  }
  const auto bins = get<std::uint32_t>(in, path);
  const auto dim = get<std::uint32_t>(in, path);
  if (dim != kFeatureDim) {
    throw Error(ErrorCode::kShapeMismatch, "checkpoint feature dim " + std::to_string(dim));
  }
  if (bins < 1 || bins > 1u << 16) {
    throw Error(ErrorCode::kParseError, "implausible bin count " + std::to_string(bins));
  }
  PolicyParams params(static_cast<int>(bins));
  params.sampling_temperature = get<double>(in, path);
  for (std::size_t h = 0; h < kNumHeads; ++h) {
    for (std::size_t k = 0; k < params.vocab(); ++k) {
      auto row = params.row(h, k);
      for (std::size_t j = 0; j < kFeatureDim; ++j) row[j] = get<double>(in, path);
    }
    for (std::size_t k = 0; k < params.vocab(); ++k) params.row(h, k)[kFeatureDim] = get<double>(in, path);
  }
  return params;
}

Manifest load_manifest(const std::filesystem::path& checkpoint) {
  Manifest out;
  std::ifstream in(manifest_path(checkpoint));
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

}  // namespace layoutpref
