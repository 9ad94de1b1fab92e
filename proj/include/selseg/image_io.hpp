#ifndef SELSEG_IMAGE_IO_HPP_
#define SELSEG_IMAGE_IO_HPP_

// PGM/PPM (binary P5/P6) and PNG codecs. PNG goes through the libpng
// simplified API, so consumers must link libpng.

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "selseg/grid.hpp"

namespace selseg {

/// Luminance of an RGB triple; gray triples map to themselves exactly.
inline double luminance(double r, double g, double b) {
  if (r == g && g == b) return r;
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

namespace detail {

inline bool has_png_signature(std::span<std::uint8_t const> bytes) {
  static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kSig, 8) == 0;
}

inline ScalarField decode_png(std::span<std::uint8_t const> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw IoError(std::string("png decode failed: ") + image.message);
  }
  bool const color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  int const w = static_cast<int>(image.width);
  int const h = static_cast<int>(image.height);
  if (w == 0 || h == 0) {
    png_image_free(&image);
    throw IoError("png has zero area");
  }
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw IoError("png decode failed: " + msg);
  }
  ScalarField out(w, h);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (color) {
      out[i] = luminance(buffer[3 * i] / 255.0, buffer[3 * i + 1] / 255.0,
                         buffer[3 * i + 2] / 255.0);
    } else {
      out[i] = buffer[i] / 255.0;
    }
  }
  return out;
}

inline std::vector<std::uint8_t> encode_png(int width, int height,
                                            std::span<std::uint8_t const> pixels,
                                            bool rgb) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = rgb ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
    throw IoError(std::string("png encode failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
    throw IoError(std::string("png encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

// Netpbm header tokens, skipping '#' comments.
inline std::string pnm_token(std::span<std::uint8_t const> bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::string tok;
  while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') {
    tok.push_back(static_cast<char>(bytes[pos++]));
  }
  return tok;
}

inline ScalarField decode_pnm(std::span<std::uint8_t const> bytes) {
  std::size_t pos = 0;
  std::string const magic = pnm_token(bytes, pos);
  if (magic != "P5" && magic != "P6") {
    throw IoError("unsupported netpbm variant '" + magic + "'");
  }
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(pnm_token(bytes, pos));
    h = std::stoi(pnm_token(bytes, pos));
    maxval = std::stoi(pnm_token(bytes, pos));
  } catch (std::exception const&) {
    throw IoError("malformed netpbm header");
  }
  if (w <= 0 || h <= 0) throw IoError("netpbm image has zero area");
  if (maxval <= 0 || maxval > 65535) throw IoError("netpbm maxval out of range");
  ++pos;  // single whitespace byte before the raster
  int const channels = magic == "P6" ? 3 : 1;
  int const bytes_per_sample = maxval > 255 ? 2 : 1;
  std::size_t const needed =
      static_cast<std::size_t>(w) * h * channels * bytes_per_sample;
  if (pos + needed > bytes.size()) throw IoError("truncated netpbm raster");
  auto sample = [&](std::size_t k) -> double {
    std::size_t const at = pos + k * bytes_per_sample;
    unsigned v = bytes[at];
    if (bytes_per_sample == 2) v = (v << 8) | bytes[at + 1];
    return static_cast<double>(v) / maxval;
  };
  ScalarField out(w, h);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (channels == 3) {
      out[i] = luminance(sample(3 * i), sample(3 * i + 1), sample(3 * i + 2));
    } else {
      out[i] = sample(i);
    }
  }
  return out;
}

inline std::vector<std::uint8_t> read_file(std::string const& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(std::string const& path, std::span<std::uint8_t const> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.write(reinterpret_cast<char const*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline bool wants_png(std::string const& path) {
  auto const dot = path.rfind('.');
  if (dot == std::string::npos) return false;
  std::string ext = path.substr(dot + 1);
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == "png";
}

inline std::vector<std::uint8_t> encode_pgm(int width, int height,
                                            std::span<std::uint8_t const> pixels) {
  std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

inline std::vector<std::uint8_t> to_bytes(ScalarField const& f) {
  std::vector<std::uint8_t> px(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    px[i] = static_cast<std::uint8_t>(std::lround(std::clamp(f[i], 0.0, 1.0) * 255.0));
  }
  return px;
}

}  // namespace detail

/// Decodes PNG or binary PGM/PPM bytes into full-scale-relative intensities
/// in [0,1] (value / maxval), colour converted to luminance.
inline ScalarField decode_raster(std::span<std::uint8_t const> bytes) {
  if (bytes.empty()) throw IoError("empty image data");
  if (detail::has_png_signature(bytes)) return detail::decode_png(bytes);
  if (bytes[0] == 'P') return detail::decode_pnm(bytes);
  throw IoError("unsupported image format");
}

inline GrayImage decode_image(std::span<std::uint8_t const> bytes) {
  ScalarField raw = decode_raster(bytes);
  if (raw.width() < 3 || raw.height() < 3) {
    throw IoError("image too small: need at least 3x3 pixels");
  }
  return GrayImage::normalized(std::move(raw));
}

inline BinaryMask decode_mask(std::span<std::uint8_t const> bytes) {
  ScalarField raw = decode_raster(bytes);
  BinaryMask mask(raw.width(), raw.height());
  for (std::size_t i = 0; i < raw.size(); ++i) mask[i] = raw[i] > 0.5 ? 1 : 0;
  return mask;
}

/// Loads a grayscale or colour raster and min-max normalises it to [0,1].
inline GrayImage load_image(std::string const& path) {
  return decode_image(detail::read_file(path));
}

/// Pixels above half of full scale become 1.
inline BinaryMask load_mask(std::string const& path) {
  return decode_mask(detail::read_file(path));
}

inline std::vector<std::uint8_t> mask_bytes(BinaryMask const& mask) {
  std::vector<std::uint8_t> px(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) px[i] = mask[i] ? 255 : 0;
  return px;
}

inline std::vector<std::uint8_t> mask_png(BinaryMask const& mask) {
  return detail::encode_png(mask.width(), mask.height(), mask_bytes(mask), false);
}

/// Writes 0/255 pixels; PNG when the path ends in .png, PGM otherwise.
inline void save_mask(BinaryMask const& mask, std::string const& path) {
  auto const px = mask_bytes(mask);
  auto const bytes = detail::wants_png(path)
                         ? detail::encode_png(mask.width(), mask.height(), px, false)
                         : detail::encode_pgm(mask.width(), mask.height(), px);
  detail::write_file(path, bytes);
}

inline std::vector<std::uint8_t> image_png(GrayImage const& image) {
  auto const px = detail::to_bytes(image.field());
  return detail::encode_png(image.width(), image.height(), px, false);
}

inline void save_image(GrayImage const& image, std::string const& path) {
  auto const px = detail::to_bytes(image.field());
  auto const bytes = detail::wants_png(path)
                         ? detail::encode_png(image.width(), image.height(), px, false)
                         : detail::encode_pgm(image.width(), image.height(), px);
  detail::write_file(path, bytes);
}

/// Interleaved 8-bit RGB to a PNG file.
inline void save_rgb_png(int width, int height, std::span<std::uint8_t const> rgb,
                         std::string const& path) {
  if (rgb.size() != static_cast<std::size_t>(width) * height * 3) {
    throw InputError("rgb buffer size does not match dimensions");
  }
  detail::write_file(path, detail::encode_png(width, height, rgb, true));
}

}  // namespace selseg

#endif  // SELSEG_IMAGE_IO_HPP_
