#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace keymps {

// Row-major 8-bit intensity grid.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0);

  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  bool empty() const noexcept { return width <= 0 || height <= 0; }
  void validate() const;

  bool operator==(const GrayImage&) const = default;
};

// Interleaved RGB, 3 bytes per pixel.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;
};

// Rec. 601 luma, rounded to nearest.
GrayImage to_gray(const RgbImage& rgb);

// PNG (any colour type) or binary/ASCII PGM/PPM; colour input goes through to_gray.
GrayImage load_gray_image(const std::filesystem::path& path);

std::string encode_png(const GrayImage& image);
void save_png(const GrayImage& image, const std::filesystem::path& path);

std::string base64_encode(const std::string& bytes);

}  // namespace keymps
