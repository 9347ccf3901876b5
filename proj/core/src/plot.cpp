#include "keymps/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace keymps {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string time_colour(double u) {
  u = std::clamp(u, 0.0, 1.0);
  double r = 0.0, g = 0.0, b = 0.0;
  if (u < 0.5) {
    r = 1.0 - 2.0 * u;
    g = 2.0 * u;
  } else {
    g = 2.0 - 2.0 * u;
    b = 2.0 * u - 1.0;
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(r * 255)),
                static_cast<int>(std::lround(g * 255)), static_cast<int>(std::lround(b * 255)));
  return buf;
}

struct Panel {
  const char* title;
  int a;  // horizontal axis index
  int b;  // vertical axis index
  bool flip;  // draw b upward
};

}  // namespace

std::string keypoint_overlay_svg(const GrayImage& crop, std::span<const KeypointPair> pairs) {
  const int w = std::max(crop.width, 1);
  const int h = std::max(crop.height, 1);
  const double font = std::max(10.0, std::min(w, h) / 20.0);
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
                    std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) + "\">\n";
  if (!crop.empty()) {
    out += "<image x=\"0\" y=\"0\" width=\"" + std::to_string(w) + "\" height=\"" + std::to_string(h) +
           "\" href=\"data:image/png;base64," + base64_encode(encode_png(crop)) + "\"/>\n";
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    out += "<line x1=\"" + num(p.start.x()) + "\" y1=\"" + num(p.start.y()) + "\" x2=\"" + num(p.goal.x()) +
           "\" y2=\"" + num(p.goal.y()) + "\" stroke=\"red\" stroke-width=\"2\"/>\n";
    out += "<circle cx=\"" + num(p.start.x()) + "\" cy=\"" + num(p.start.y()) + "\" r=\"3\" fill=\"red\"/>\n";
    out += "<text x=\"" + num(p.start.x() + 4) + "\" y=\"" + num(p.start.y() + font) + "\" font-size=\"" + num(font) +
           "\" fill=\"lime\" font-family=\"sans-serif\">" + std::to_string(i + 1) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string path_projections_svg(const Trajectory& trajectory, std::size_t max_segments) {
  constexpr double kPanel = 300.0;
  constexpr double kPad = 30.0;
  const std::array<Panel, 3> panels{{{"top (x-y)", 0, 1, false}, {"front (x-z)", 0, 2, true}, {"side (y-z)", 1, 2, true}}};

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(3 * (kPanel + kPad) + kPad) +
                    "\" height=\"" + num(kPanel + 2 * kPad) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const auto& pts = trajectory.points;
  if (pts.size() < 2) return out + "</svg>\n";

  Vec3 lo = pts.front();
  Vec3 hi = pts.front();
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const std::size_t stride = std::max<std::size_t>(1, (pts.size() - 1 + max_segments - 1) / std::max<std::size_t>(max_segments, 1));
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < pts.size(); i += stride) idx.push_back(i);
  if (idx.back() != pts.size() - 1) idx.push_back(pts.size() - 1);

  for (std::size_t k = 0; k < panels.size(); ++k) {
    const Panel& pn = panels[k];
    const double ox = kPad + static_cast<double>(k) * (kPanel + kPad);
    const double span = std::max({hi[pn.a] - lo[pn.a], hi[pn.b] - lo[pn.b], 1e-9});
    auto sx = [&](const Vec3& p) { return ox + (p[pn.a] - lo[pn.a]) / span * kPanel; };
    auto sy = [&](const Vec3& p) {
      const double v = (p[pn.b] - lo[pn.b]) / span * kPanel;
      return pn.flip ? kPad + kPanel - v : kPad + v;
    };
    out += "<g>\n<rect x=\"" + num(ox) + "\" y=\"" + num(kPad) + "\" width=\"" + num(kPanel) + "\" height=\"" +
           num(kPanel) + "\" fill=\"none\" stroke=\"#999\"/>\n<text x=\"" + num(ox) + "\" y=\"" + num(kPad - 8) +
           "\" font-size=\"14\" font-family=\"sans-serif\">" + pn.title + "</text>\n";
    for (std::size_t s = 0; s + 1 < idx.size(); ++s) {
      const Vec3& a = pts[idx[s]];
      const Vec3& b = pts[idx[s + 1]];
      const double u = static_cast<double>(idx[s]) / static_cast<double>(pts.size() - 1);
      out += "<line x1=\"" + num(sx(a)) + "\" y1=\"" + num(sy(a)) + "\" x2=\"" + num(sx(b)) + "\" y2=\"" + num(sy(b)) +
             "\" stroke=\"" + time_colour(u) + "\" stroke-width=\"1.5\"/>\n";
    }
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace keymps
