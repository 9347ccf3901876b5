#include "keymps/perception.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "keymps/error.hpp"

namespace keymps {
namespace {

// Values within this distance of the threshold count as background.
constexpr double kThresholdSlack = 1e-6;

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + radius];
  }
  for (auto& v : k) v /= sum;
  return k;
}

}  // namespace

std::vector<float> gaussian_blur(const GrayImage& image, double sigma) {
  image.validate();
  const int w = image.width;
  const int h = image.height;
  std::vector<float> out(image.pixels.begin(), image.pixels.end());
  if (!(sigma > 0.0)) return out;

  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  std::vector<double> horizontal(out.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int xx = std::clamp(x + k, 0, w - 1);
        acc += kernel[k + radius] * image.at(xx, y);
      }
      horizontal[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int yy = std::clamp(y + k, 0, h - 1);
        acc += kernel[k + radius] * horizontal[static_cast<std::size_t>(yy) * w + x];
      }
      out[static_cast<std::size_t>(y) * w + x] = static_cast<float>(acc);
    }
  }
  return out;
}

int histogram_mode(std::span<const float> intensities) {
  std::array<std::size_t, 256> histogram{};
  for (float v : intensities) {
    const long bin = std::clamp(std::lround(static_cast<double>(v)), 0L, 255L);
    ++histogram[static_cast<std::size_t>(bin)];
  }
  // max_element returns the first maximum, i.e. the lowest intensity on ties.
  return static_cast<int>(std::max_element(histogram.begin(), histogram.end()) - histogram.begin());
}

GrayImage crop(const GrayImage& image, const BoundingBox& box) {
  if (box.w < 1 || box.h < 1 || box.x < 0 || box.y < 0 || box.x + box.w > image.width ||
      box.y + box.h > image.height) {
    throw Error(ErrorCode::InvalidArgument, "crop box lies outside the image");
  }
  GrayImage out(box.w, box.h);
  for (int y = 0; y < box.h; ++y) {
    for (int x = 0; x < box.w; ++x) out.at(x, y) = image.at(box.x + x, box.y + y);
  }
  return out;
}

Detection detect_object(const GrayImage& image, const DetectorConfig& config) {
  image.validate();
  if (!(config.threshold_delta > 0.0 && config.threshold_delta < 255.0)) {
    throw Error(ErrorCode::InvalidArgument, "threshold_delta must lie in (0, 255)");
  }
  if (!(config.blur_sigma >= 0.0 && std::isfinite(config.blur_sigma))) {
    throw Error(ErrorCode::InvalidArgument, "blur_sigma must be finite and non-negative");
  }
  if (config.min_area < 1) throw Error(ErrorCode::InvalidArgument, "min_area must be at least 1");
  const int w = image.width;
  const int h = image.height;
  const auto blurred = gaussian_blur(image, config.blur_sigma);
  const int background = histogram_mode(blurred);

  std::vector<std::uint8_t> mask(blurred.size(), 0);
  bool any = false;
  for (std::size_t i = 0; i < blurred.size(); ++i) {
    if (std::abs(static_cast<double>(blurred[i]) - background) > config.threshold_delta + kThresholdSlack) {
      mask[i] = 1;
      any = true;
    }
  }
  if (!any) throw Error(ErrorCode::NoObjectFound, "no pixel differs from the background intensity");

  // 8-connected flood fill in scan order; first-found component wins ties.
  std::vector<int> label(mask.size(), -1);
  std::vector<std::size_t> stack;
  BoundingBox best_box;
  int best_area = 0;
  int next_label = 0;
  for (std::size_t seed = 0; seed < mask.size(); ++seed) {
    if (!mask[seed] || label[seed] >= 0) continue;
    int area = 0;
    int x0 = w, y0 = h, x1 = -1, y1 = -1;
    label[seed] = next_label;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(idx % w);
      const int y = static_cast<int>(idx / w);
      ++area;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const std::size_t n = static_cast<std::size_t>(ny) * w + nx;
          if (mask[n] && label[n] < 0) {
            label[n] = next_label;
            stack.push_back(n);
          }
        }
      }
    }
    if (area > best_area) {
      best_area = area;
      best_box = {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
    }
    ++next_label;
  }
  if (best_area < config.min_area) {
    throw Error(ErrorCode::NoObjectFound, "largest component has " + std::to_string(best_area) +
                                              " px, below min_area " + std::to_string(config.min_area));
  }
  return Detection{best_box, crop(image, best_box), best_area, background};
}

}  // namespace keymps
