#include <doctest.h>

#include <fstream>

#include "keymps/error.hpp"
#include "keymps/image.hpp"
#include "keymps/plot.hpp"
#include "keymps/trajectory_io.hpp"
#include "support.hpp"

using namespace keymps;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

Trajectory helix(std::size_t n, double dt) {
  Trajectory t{dt, {}};
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 0.01 * static_cast<double>(i);
    t.points.emplace_back(0.1 + 0.05 * std::cos(a), 0.09 + 0.05 * std::sin(a), 0.15 - 1e-4 * static_cast<double>(i));
  }
  return t;
}

}  // namespace

TEST_CASE("trajectory CSV round trip") {
  const Trajectory t = helix(500, 1e-3);
  const std::string csv = format_trajectory_csv(t);
  CHECK(csv.rfind("t,x,y,z\n", 0) == 0);
  const Trajectory back = parse_trajectory_csv(csv);
  REQUIRE(back.size() == t.size());
  CHECK(back.dt == doctest::Approx(1e-3));
  for (std::size_t i = 0; i < t.size(); ++i) CHECK((back.points[i] - t.points[i]).norm() < 1e-9);
  CHECK(format_trajectory_csv(back) == csv);
}

TEST_CASE("formatting is stable for awkward time steps") {
  for (double dt : {1.0 / 3.0, 0.0007, 0.0123456789}) {
    const std::string csv = format_trajectory_csv(helix(2000, dt));
    CHECK(format_trajectory_csv(parse_trajectory_csv(csv)) == csv);
  }
}

TEST_CASE("CSV errors name the line") {
  CHECK(code_of([] { parse_trajectory_csv(""); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_trajectory_csv("a,b,c,d\n0,0,0,0\n"); }) == ErrorCode::ParseError);
  try {
    parse_trajectory_csv("t,x,y,z\n0,0,0,0\n0.001,0,zero,0\n");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK(code_of([] { parse_trajectory_csv("t,x,y,z\n0,0,0,0\n0.001,0,0,0\n0.005,0,0,0\n"); }) ==
        ErrorCode::ParseError);
  CHECK(code_of([] { load_trajectory_csv("/nonexistent/dir/t.csv"); }) == ErrorCode::IoError);
}

TEST_CASE("PNG round trip") {
  const auto dir = testing::scratch_dir("io_png");
  GrayImage img(37, 23);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) img.at(x, y) = static_cast<std::uint8_t>((x * 13 + y * 7) % 256);
  }
  save_png(img, dir / "a.png");
  CHECK(load_gray_image(dir / "a.png") == img);
  CHECK(encode_png(img).substr(1, 3) == "PNG");
}

TEST_CASE("PGM and PPM input") {
  const auto dir = testing::scratch_dir("io_pnm");
  {
    std::ofstream f(dir / "a.pgm");
    f << "P2\n# comment\n3 2\n255\n0 10 20\n30 40 255\n";
  }
  const GrayImage g = load_gray_image(dir / "a.pgm");
  CHECK(g.width == 3);
  CHECK(g.height == 2);
  CHECK(g.at(2, 1) == 255);
  CHECK(g.at(1, 0) == 10);
  {
    std::ofstream f(dir / "b.ppm", std::ios::binary);
    f << "P6\n2 1\n255\n";
    const unsigned char px[] = {255, 0, 0, 10, 200, 30};
    f.write(reinterpret_cast<const char*>(px), sizeof px);
  }
  const GrayImage c = load_gray_image(dir / "b.ppm");
  CHECK(c.at(0, 0) == 76);   // round(0.299 * 255)
  CHECK(c.at(1, 0) == 124);  // round(0.299*10 + 0.587*200 + 0.114*30)
  CHECK(code_of([&] { load_gray_image(dir / "missing.png"); }) == ErrorCode::IoError);
}

TEST_CASE("Rec. 601 luma") {
  RgbImage rgb{3, 1, {0, 0, 0, 255, 255, 255, 0, 0, 255}};
  const GrayImage g = to_gray(rgb);
  CHECK(g.at(0, 0) == 0);
  CHECK(g.at(1, 0) == 255);
  CHECK(g.at(2, 0) == 29);
}

TEST_CASE("base64") {
  CHECK(base64_encode("") == "");
  CHECK(base64_encode("f") == "Zg==");
  CHECK(base64_encode("fo") == "Zm8=");
  CHECK(base64_encode("foobar") == "Zm9vYmFy");
}

TEST_CASE("SVG artifacts") {
  const GrayImage crop(40, 20, 120);
  const std::vector<KeypointPair> pairs{{{10, 0}, {10, 20}}, {{30, 0}, {30, 20}}};
  const std::string overlay = keypoint_overlay_svg(crop, pairs);
  CHECK(overlay.rfind("<svg", 0) == 0);
  CHECK(overlay.find("data:image/png;base64,") != std::string::npos);
  CHECK(overlay.find(">2<") != std::string::npos);
  CHECK(keypoint_overlay_svg(crop, pairs) == overlay);

  const std::string path = path_projections_svg(helix(3000, 1e-3));
  CHECK(path.rfind("<svg", 0) == 0);
  CHECK(path.find("</svg>") != std::string::npos);
  std::size_t lines = 0;
  for (auto pos = path.find("<line"); pos != std::string::npos; pos = path.find("<line", pos + 1)) ++lines;
  CHECK(lines <= 3 * 600 + 12);
}
