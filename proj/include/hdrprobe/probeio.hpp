#pragma once

#include "hdrprobe/reflectance.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace hdrprobe {

// All formats are little-endian and square; cell order inside the library is
// row-major with row 0 at the top of the image.

/// Float map: "PF\n<w> <h>\n-1.0\n" then rows bottom-to-top, three
/// little-endian float32 per pixel.
struct FloatMap {
  int width = 0;
  int height = 0;
  /// Row-major, top row first; one row per pixel, three channels.
  Eigen::Matrix<float, DYN, 3> pixels;
};

std::vector<std::uint8_t> encode_pfm(const FloatMap& map);
FloatMap decode_pfm(const std::vector<std::uint8_t>& bytes);

void write_env(const std::filesystem::path& path, const LightEnv& env);
LightEnv read_env(const std::filesystem::path& path);

/// Linear or LDR sphere images stored as float maps.
void write_sphere_pfm(const std::filesystem::path& path, const SphereImage& img);
SphereImage read_sphere_pfm(const std::filesystem::path& path, Encoding encoding);

/// 8-bit RGB PNG with the x^(1/2.2) power-law transfer; byte = floor(255 x + 0.5).
void write_probe(const std::filesystem::path& path, const SphereImage& img);
SphereImage read_probe(const std::filesystem::path& path);

std::uint8_t quantize_8bit(double x);
/// Rounds every value to the nearest representable 8-bit level.
SphereImage quantize_probe(const SphereImage& img);

/// Binary reflectance-field bundle:
///   8-byte magic "HDRPFLD1", u32 brdf tag, u32 sphere resolution,
///   u32 basis resolution, u32 channel count (always 3), then one
///   row-major float32 plane per channel (rows = sphere pixels,
///   columns = basis cells).
inline constexpr std::size_t kFieldHeaderBytes = 24;
void write_field(const std::filesystem::path& path, const ReflectanceField& field);
ReflectanceField read_field(const std::filesystem::path& path);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

}  // namespace hdrprobe
