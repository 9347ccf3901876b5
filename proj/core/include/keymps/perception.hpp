#pragma once

#include <span>
#include <vector>

#include "keymps/image.hpp"

namespace keymps {

struct BoundingBox {
  int x = 0;  // top-left column
  int y = 0;  // top-left row
  int w = 0;
  int h = 0;

  bool operator==(const BoundingBox&) const = default;
};

struct DetectorConfig {
  double threshold_delta = 30.0;  // intensity units
  double blur_sigma = 1.5;        // pixels; 0 disables the blur
  int min_area = 25;              // pixels
};

struct Detection {
  BoundingBox box;
  GrayImage crop;      // from the unblurred source image
  int area = 0;        // pixels in the winning component
  int background = 0;  // histogram mode of the blurred image
};

// Separable Gaussian with a 3-sigma kernel and clamped borders.
std::vector<float> gaussian_blur(const GrayImage& image, double sigma);

// Most common rounded intensity; ties go to the lower intensity.
int histogram_mode(std::span<const float> intensities);

GrayImage crop(const GrayImage& image, const BoundingBox& box);

// Blur, take the histogram mode as background, threshold |I - background| >
// threshold_delta, label 8-connected components and return the bounding box
// of the largest one. NoObjectFound when the mask is empty or the largest
// component is below min_area.
Detection detect_object(const GrayImage& image, const DetectorConfig& config = {});

}  // namespace keymps
