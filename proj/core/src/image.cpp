#include "keymps/image.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>
#include <png.h>

#include "keymps/error.hpp"

namespace keymps {
namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read image " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

RgbImage decode_png(const std::string& bytes, const std::string& name) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::ParseError, "cannot decode PNG " + name + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  RgbImage rgb;
  rgb.width = static_cast<int>(image.width);
  rgb.height = static_cast<int>(image.height);
  rgb.data.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgb.data.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(ErrorCode::ParseError, "cannot decode PNG " + name + ": " + image.message);
  }
  return rgb;
}

// Netpbm: P2/P5 grayscale, P3/P6 colour, maxval <= 255.
GrayImage decode_pnm(const std::string& bytes, const std::string& name) {
  std::size_t pos = 2;
  auto next_token = [&]() -> long {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) throw Error(ErrorCode::ParseError, "malformed netpbm header in " + name);
    return std::stol(bytes.substr(start, pos - start));
  };
  const char kind = bytes[1];
  const long w = next_token();
  const long h = next_token();
  const long maxval = next_token();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) {
    throw Error(ErrorCode::ParseError, "unsupported netpbm dimensions or maxval in " + name);
  }
  const bool colour = kind == '3' || kind == '6';
  const bool binary = kind == '5' || kind == '6';
  const std::size_t channels = colour ? 3 : 1;
  const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * channels;
  std::vector<std::uint8_t> samples(count);
  if (binary) {
    ++pos;  // single whitespace after maxval
    if (bytes.size() < pos + count) throw Error(ErrorCode::ParseError, "truncated netpbm data in " + name);
    for (std::size_t i = 0; i < count; ++i) samples[i] = static_cast<std::uint8_t>(bytes[pos + i]);
  } else {
    for (std::size_t i = 0; i < count; ++i) samples[i] = static_cast<std::uint8_t>(next_token());
  }
  if (maxval != 255) {
    for (auto& s : samples) s = static_cast<std::uint8_t>(std::lround(255.0 * s / static_cast<double>(maxval)));
  }
  if (colour) {
    return to_gray(RgbImage{static_cast<int>(w), static_cast<int>(h), std::move(samples)});
  }
  GrayImage out(static_cast<int>(w), static_cast<int>(h));
  out.pixels = std::move(samples);
  return out;
}

}  // namespace

GrayImage::GrayImage(int w, int h, std::uint8_t fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(std::max(w, 0)) * std::max(h, 0), fill) {}

void GrayImage::validate() const {
  if (width < 1 || height < 1) throw Error(ErrorCode::InvalidArgument, "image must be at least 1x1");
  if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::InvalidArgument, "pixel count does not match image dimensions");
  }
}

GrayImage to_gray(const RgbImage& rgb) {
  GrayImage out(rgb.width, rgb.height);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    const double luma = 0.299 * rgb.data[3 * i] + 0.587 * rgb.data[3 * i + 1] + 0.114 * rgb.data[3 * i + 2];
    out.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(luma), 0L, 255L));
  }
  return out;
}

GrayImage load_gray_image(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) == 0) {
    return to_gray(decode_png(bytes, path.string()));
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] >= '2' && bytes[1] <= '6' && bytes[1] != '4') {
    return decode_pnm(bytes, path.string());
  }
  throw Error(ErrorCode::ParseError, "unsupported image format: " + path.string());
}

std::string encode_png(const GrayImage& image) {
  image.validate();
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, image.pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::IoError, std::string("PNG encode failed: ") + png.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, image.pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::IoError, std::string("PNG encode failed: ") + png.message);
  }
  out.resize(size);
  return out;
}

void save_png(const GrayImage& image, const std::filesystem::path& path) {
  const std::string bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string base64_encode(const std::string& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

}  // namespace keymps
