#include "hdrprobe/probeio.hpp"

#include <png.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace hdrprobe {

namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

void put_f32(std::vector<std::uint8_t>& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

float get_f32(const std::uint8_t* p) { return std::bit_cast<float>(get_u32(p)); }

std::string path_string(const std::filesystem::path& path) { return path.string(); }

}  // namespace

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path_string(path));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path_string(path));
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw FormatError("write failed for " + path_string(path));
}

std::vector<std::uint8_t> encode_pfm(const FloatMap& map) {
  if (map.pixels.rows() != Eigen::Index(map.width) * map.height) {
    throw DomainError("encode_pfm: pixel count does not match dimensions");
  }
  const std::string header = "PF\n" + std::to_string(map.width) + " " + std::to_string(map.height) + "\n-1.0\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + std::size_t(map.pixels.size()) * 4);
  for (int row = map.height - 1; row >= 0; --row) {
    for (int col = 0; col < map.width; ++col) {
      for (int c = 0; c < kChannels; ++c) put_f32(out, map.pixels(Eigen::Index(row) * map.width + col, c));
    }
  }
  return out;
}

FloatMap decode_pfm(const std::vector<std::uint8_t>& bytes) {
  // Header: three whitespace-terminated lines "PF", "<w> <h>", "<scale>".
  std::size_t pos = 0;
  auto next_line = [&]() {
    const auto start = pos;
    while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    if (pos >= bytes.size()) throw FormatError("float map: truncated header");
    std::string line(bytes.begin() + std::ptrdiff_t(start), bytes.begin() + std::ptrdiff_t(pos));
    ++pos;
    return line;
  };
  if (next_line() != "PF") throw FormatError("float map: bad magic (expected PF)");

  FloatMap map;
  {
    std::istringstream dims(next_line());
    std::string extra;
    if (!(dims >> map.width >> map.height) || (dims >> extra) || map.width <= 0 || map.height <= 0) {
      throw FormatError("float map: malformed dimensions");
    }
  }
  {
    std::istringstream scale_line(next_line());
    double scale = 0;
    std::string extra;
    if (!(scale_line >> scale) || (scale_line >> extra) || scale == 0.0 || !std::isfinite(scale)) {
      throw FormatError("float map: malformed scale field");
    }
    if (scale > 0.0) throw FormatError("float map: big-endian payloads are not supported");
  }

  const std::size_t expected = std::size_t(map.width) * std::size_t(map.height) * 3 * 4;
  if (bytes.size() - pos < expected) throw FormatError("float map: truncated payload");
  if (bytes.size() - pos > expected) throw FormatError("float map: trailing bytes after payload");

  map.pixels.resize(Eigen::Index(map.width) * map.height, 3);
  const std::uint8_t* p = bytes.data() + pos;
  for (int row = map.height - 1; row >= 0; --row) {
    for (int col = 0; col < map.width; ++col) {
      for (int c = 0; c < kChannels; ++c, p += 4) map.pixels(Eigen::Index(row) * map.width + col, c) = get_f32(p);
    }
  }
  return map;
}

namespace {

FloatMap to_float_map(const BallGrid& grid, const RadianceMat& m) {
  return {grid.resolution(), grid.resolution(), m.cast<float>()};
}

RadianceMat from_float_map(const FloatMap& map, const std::filesystem::path& path) {
  if (map.width != map.height) throw FormatError(path_string(path) + ": image must be square");
  if (map.width < 2) throw FormatError(path_string(path) + ": resolution must be at least 2");
  if (!map.pixels.allFinite() || (map.pixels.array() < 0.0f).any()) {
    throw FormatError(path_string(path) + ": NaN, infinite, or negative values");
  }
  return map.pixels.cast<double>();
}

}  // namespace

void write_env(const std::filesystem::path& path, const LightEnv& env) {
  write_bytes(path, encode_pfm(to_float_map(env.grid(), env.radiance())));
}

LightEnv read_env(const std::filesystem::path& path) {
  const FloatMap map = decode_pfm(read_bytes(path));
  RadianceMat radiance = from_float_map(map, path);
  return {shared_grid(map.width), std::move(radiance)};
}

void write_sphere_pfm(const std::filesystem::path& path, const SphereImage& img) {
  write_bytes(path, encode_pfm(to_float_map(img.grid(), img.pixels())));
}

SphereImage read_sphere_pfm(const std::filesystem::path& path, Encoding encoding) {
  const FloatMap map = decode_pfm(read_bytes(path));
  RadianceMat pixels = from_float_map(map, path);
  if (encoding == Encoding::GammaLDR && (pixels.array() > 1.0).any()) {
    throw FormatError(path_string(path) + ": LDR values above 1");
  }
  return {shared_grid(map.width), std::move(pixels), encoding};
}

std::uint8_t quantize_8bit(double x) {
  const double clamped = std::clamp(x, 0.0, 1.0);
  return std::uint8_t(std::floor(255.0 * clamped + 0.5));
}

SphereImage quantize_probe(const SphereImage& img) {
  RadianceMat q = img.pixels().unaryExpr([](double x) { return double(quantize_8bit(x)) / 255.0; });
  return {img.grid_ptr(), std::move(q), img.encoding()};
}

void write_probe(const std::filesystem::path& path, const SphereImage& img) {
  if (img.encoding() != Encoding::GammaLDR) {
    throw DomainError("write_probe: probe images must be GammaLDR");
  }
  const int res = img.resolution();
  std::vector<std::uint8_t> buffer(std::size_t(res) * std::size_t(res) * 3);
  for (Eigen::Index cell = 0; cell < img.grid().cell_count(); ++cell) {
    for (int c = 0; c < kChannels; ++c) buffer[std::size_t(cell) * 3 + std::size_t(c)] = quantize_8bit(img.pixels()(cell, c));
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = png_uint_32(res);
  image.height = png_uint_32(res);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path_string(path).c_str(), 0, buffer.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw FormatError("cannot write " + path_string(path) + ": " + message);
  }
}

SphereImage read_probe(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path_string(path).c_str())) {
    const std::string message = image.message;
    png_image_free(&image);
    throw FormatError(path_string(path) + ": " + message);
  }
  if (image.format != PNG_FORMAT_RGB) {
    png_image_free(&image);
    throw FormatError(path_string(path) + ": expected 8-bit RGB without alpha");
  }
  if (image.width != image.height || image.width < 2) {
    png_image_free(&image);
    throw FormatError(path_string(path) + ": probe images must be square with side >= 2");
  }
  const int res = int(image.width);
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw FormatError(path_string(path) + ": " + message);
  }
  auto grid = shared_grid(res);
  RadianceMat pixels(grid->cell_count(), kChannels);
  for (Eigen::Index cell = 0; cell < grid->cell_count(); ++cell) {
    for (int c = 0; c < kChannels; ++c) pixels(cell, c) = double(buffer[std::size_t(cell) * 3 + std::size_t(c)]) / 255.0;
  }
  return {std::move(grid), std::move(pixels), Encoding::GammaLDR};
}

void write_field(const std::filesystem::path& path, const ReflectanceField& field) {
  std::vector<std::uint8_t> out = {'H', 'D', 'R', 'P', 'F', 'L', 'D', '1'};
  put_u32(out, std::uint32_t(field.brdf()));
  put_u32(out, std::uint32_t(field.sphere_resolution()));
  put_u32(out, std::uint32_t(field.basis_resolution()));
  put_u32(out, std::uint32_t(kChannels));
  const auto& w0 = field.weights(0);
  out.reserve(kFieldHeaderBytes + std::size_t(w0.size()) * kChannels * 4);
  for (int c = 0; c < kChannels; ++c) {
    const auto& w = field.weights(c);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index k = 0; k < w.cols(); ++k) put_f32(out, float(w(r, k)));
    }
  }
  write_bytes(path, out);
}

ReflectanceField read_field(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  if (bytes.size() < kFieldHeaderBytes || std::memcmp(bytes.data(), "HDRPFLD1", 8) != 0) {
    throw FormatError(path_string(path) + ": not a reflectance field (bad magic)");
  }
  const auto tag = get_u32(bytes.data() + 8);
  const auto sphere_res = get_u32(bytes.data() + 12);
  const auto basis_res = get_u32(bytes.data() + 16);
  const auto channels = get_u32(bytes.data() + 20);
  if (tag > std::uint32_t(Brdf::External)) throw FormatError(path_string(path) + ": unknown BRDF tag");
  if (channels != std::uint32_t(kChannels)) throw FormatError(path_string(path) + ": channel count must be 3");
  if (sphere_res < 2 || basis_res < 2 || sphere_res > 4096 || basis_res > 4096) {
    throw FormatError(path_string(path) + ": implausible resolution");
  }
  const std::size_t rows = std::size_t(sphere_res) * sphere_res;
  const std::size_t cols = std::size_t(basis_res) * basis_res;
  if (bytes.size() != kFieldHeaderBytes + rows * cols * channels * 4) {
    throw FormatError(path_string(path) + ": payload size does not match header");
  }

  std::vector<Mat<double>> planes;
  const std::uint8_t* p = bytes.data() + kFieldHeaderBytes;
  for (std::uint32_t c = 0; c < channels; ++c) {
    Mat<double> w(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t k = 0; k < cols; ++k, p += 4) w(Eigen::Index(r), Eigen::Index(k)) = get_f32(p);
    }
    planes.push_back(std::move(w));
  }
  if (planes[0] == planes[1] && planes[0] == planes[2]) planes.resize(1);
  try {
    return {Brdf(tag), shared_grid(int(sphere_res)), shared_grid(int(basis_res)), std::move(planes)};
  } catch (const DomainError& e) {
    throw FormatError(path_string(path) + ": " + e.what());
  }
}

}  // namespace hdrprobe
