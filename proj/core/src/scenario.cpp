#include "keymps/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "keymps/dictionary.hpp"
#include "keymps/error.hpp"
#include "keymps/sequencer.hpp"

namespace keymps {
namespace {

using nlohmann::json;

Error bad(const Scenario& s, const std::string& why) {
  return Error(ErrorCode::BadScenario, "scenario '" + s.id + "': " + why);
}

PatternKind pattern_from(const std::string& name) {
  for (auto k : {PatternKind::VerticalCuts, PatternKind::HorizontalCuts, PatternKind::PieCuts, PatternKind::TipCuts,
                 PatternKind::Custom}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::ParseError, "unknown pattern kind '" + name + "'");
}

ObjectShape shape_from(const std::string& name) {
  if (name == "box") return ObjectShape::Box;
  if (name == "round") return ObjectShape::Round;
  throw Error(ErrorCode::ParseError, "unknown object shape '" + name + "'");
}

json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json vec(const Vec2& v) { return json::array({v.x(), v.y()}); }

Vec3 vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::ParseError, "expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Vec2 vec2(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::ParseError, "expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Scenario make(std::string id, std::string object, ObjectShape shape, Vec3 size, std::string instruction,
              std::string keyword, PatternKind pattern, int count, bool trained) {
  Scenario s;
  s.id = std::move(id);
  s.object = std::move(object);
  s.shape = shape;
  s.size = size;
  s.instruction = std::move(instruction);
  s.keyword = std::move(keyword);
  s.pattern = pattern;
  s.count = count;
  s.trained = trained;
  return s;
}

std::string slices_prompt(int cm) {
  return "The object is " + std::to_string(cm) + " cm long, cut it vertically into 5 cm slices";
}

}  // namespace

std::string_view to_string(PatternKind kind) noexcept {
  switch (kind) {
    case PatternKind::VerticalCuts: return "vertical_cuts";
    case PatternKind::HorizontalCuts: return "horizontal_cuts";
    case PatternKind::PieCuts: return "pie_cuts";
    case PatternKind::TipCuts: return "tip_cuts";
    case PatternKind::Custom: return "custom";
  }
  return "custom";
}

std::string_view to_string(ObjectShape shape) noexcept { return shape == ObjectShape::Round ? "round" : "box"; }

void Scenario::validate() const {
  if (id.empty()) throw bad(*this, "empty id");
  if (!(size.x() > 0.0 && size.y() > 0.0 && size.z() >= 0.0)) throw bad(*this, "object size must be positive");
  if (!(board.x() > 0.0 && board.y() > 0.0)) throw bad(*this, "board size must be positive");
  if (shape == ObjectShape::Round && std::abs(size.x() - size.y()) > 1e-12) {
    throw bad(*this, "round objects need equal length and width");
  }
  const Vec2 lo = object_min();
  const Vec2 hi = lo + size.head<2>();
  if (lo.x() < -1e-12 || lo.y() < -1e-12 || hi.x() > board.x() + 1e-12 || hi.y() > board.y() + 1e-12) {
    throw bad(*this, "object does not fit on the board");
  }
  switch (pattern) {
    case PatternKind::VerticalCuts:
    case PatternKind::HorizontalCuts:
    case PatternKind::PieCuts:
      if (count < 1) throw bad(*this, "pattern needs a positive count");
      break;
    case PatternKind::TipCuts:
      if (!(tip_fraction > 0.0 && tip_fraction < 0.5)) throw bad(*this, "tip_fraction must lie in (0, 0.5)");
      break;
    case PatternKind::Custom:
      if (custom.empty()) throw bad(*this, "custom pattern lists no segments");
      break;
  }
  if (pattern == PatternKind::PieCuts && shape != ObjectShape::Round) throw bad(*this, "pie cuts need a round object");
  if (intensity < 0 || intensity > 255) throw bad(*this, "intensity outside 0..255");
}

Vec2 Scenario::object_center() const { return center.value_or(board / 2.0); }

Vec2 Scenario::object_min() const { return object_center() - size.head<2>() / 2.0; }

Vec3 default_home(const Vec2& board) { return {board.x() / 2.0, board.y() / 2.0, 0.15}; }

std::vector<Scenario> builtin_catalog() {
  using P = PatternKind;
  using S = ObjectShape;
  std::vector<Scenario> c;
  c.push_back(make("1", "cabbage", S::Round, {0.15, 0.15, 0.12}, "A single horizontal slice in the middle",
                   "straight", P::HorizontalCuts, 1, true));
  c.push_back(make("2", "banana bread", S::Box, {0.22, 0.10, 0.07},
                   "I want to eat 1 slice for each day of this week, cut it vertically", "sawing", P::VerticalCuts, 6,
                   true));
  c.push_back(make("3", "round cake", S::Round, {0.16, 0.16, 0.08},
                   "I'm having a party for 10 people, cut 1 slice for each", "straight", P::PieCuts, 10, true));
  c.push_back(make("4", "round pizza", S::Round, {0.16, 0.16, 0.02}, "Cut it into 8 equal slices", "straight",
                   P::PieCuts, 8, true));
  for (int k = 0; k < 5; ++k) {
    const int cm = 10 + 5 * k;
    c.push_back(make(std::to_string(5 + k), "eggplant", S::Box, {cm / 100.0, 0.06, 0.05}, slices_prompt(cm),
                     "straight", P::VerticalCuts, cm / 5 - 1, true));
  }
  c.push_back(make("10", "cabbage", S::Round, {0.15, 0.15, 0.12}, "Slice the object into 3 parts horizontally",
                   "straight", P::HorizontalCuts, 2, false));
  c.push_back(make("11", "eggplant", S::Box, {0.20, 0.06, 0.05}, "Slice both tips of the object", "straight",
                   P::TipCuts, 2, false));
  // The long unseen objects need a longer board.
  const std::pair<int, std::string> long_cases[] = {{35, "eggplant"}, {40, "eggplant"}, {40, "baguette"},
                                                    {45, "baguette"}};
  int id = 12;
  for (const auto& [cm, object] : long_cases) {
    const bool bread = object == "baguette";
    Scenario s = make(std::to_string(id++), object, S::Box, {cm / 100.0, bread ? 0.07 : 0.06, bread ? 0.06 : 0.05},
                      slices_prompt(cm), bread ? "sawing" : "straight", P::VerticalCuts, cm / 5 - 1, false);
    s.board = {0.50, 0.18};
    c.push_back(std::move(s));
  }
  return c;
}

const Scenario& find_scenario(const std::vector<Scenario>& catalog, std::string_view id) {
  for (const auto& s : catalog) {
    if (s.id == id) return s;
  }
  throw Error(ErrorCode::BadScenario, "no scenario with id '" + std::string(id) + "'");
}

std::string catalog_to_json(const std::vector<Scenario>& catalog) {
  json list = json::array();
  for (const auto& s : catalog) {
    json j = {{"id", s.id},
              {"object", s.object},
              {"shape", to_string(s.shape)},
              {"size", vec(s.size)},
              {"instruction", s.instruction},
              {"keyword", s.keyword},
              {"board", vec(s.board)},
              {"height_mode", to_string(s.height_mode)},
              {"trained", s.trained},
              {"intensity", s.intensity}};
    json pattern = {{"kind", to_string(s.pattern)}};
    if (s.pattern == PatternKind::TipCuts) {
      pattern["tip_fraction"] = s.tip_fraction;
    } else if (s.pattern == PatternKind::Custom) {
      pattern["segments"] = json::array();
      for (const auto& p : s.custom) pattern["segments"].push_back({vec(p.y0), vec(p.y_goal)});
    } else {
      pattern["count"] = s.count;
    }
    j["pattern"] = pattern;
    if (s.center) j["center"] = vec(*s.center);
    list.push_back(std::move(j));
  }
  return json({{"scenarios", list}}).dump(2) + "\n";
}

std::vector<Scenario> catalog_from_json(std::string_view text) {
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw Error(ErrorCode::ParseError, "scenario catalog is not JSON");
  std::vector<Scenario> out;
  try {
    for (const auto& j : doc.at("scenarios")) {
      Scenario s;
      s.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
      s.object = j.value("object", "");
      s.shape = shape_from(j.value("shape", "box"));
      s.size = vec3(j.at("size"));
      s.instruction = j.at("instruction").get<std::string>();
      s.keyword = PrimitiveDictionary::normalize_keyword(j.value("keyword", "straight"));
      if (j.contains("board")) s.board = vec2(j["board"]);
      if (j.contains("center")) s.center = vec2(j["center"]);
      s.height_mode = parse_height_mode(j.value("height_mode", "start"));
      s.trained = j.value("trained", true);
      s.intensity = j.value("intensity", 60);
      const json& pattern = j.at("pattern");
      s.pattern = pattern_from(pattern.at("kind").get<std::string>());
      s.count = pattern.value("count", s.pattern == PatternKind::TipCuts ? 2 : 1);
      s.tip_fraction = pattern.value("tip_fraction", 0.1);
      if (pattern.contains("segments")) {
        for (const auto& seg : pattern["segments"]) {
          if (!seg.is_array() || seg.size() != 2) throw Error(ErrorCode::ParseError, "custom segment is not a pair");
          s.custom.push_back({vec3(seg[0]), vec3(seg[1])});
        }
      }
      s.validate();
      out.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("scenario catalog: ") + e.what());
  }
  return out;
}

std::vector<Scenario> load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read scenario catalog " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return catalog_from_json(buffer.str());
}

std::vector<std::pair<Vec2, Vec2>> expand_pattern(const Scenario& s) {
  s.validate();
  const Vec2 lo = s.object_min();
  const double length = s.size.x();
  const double width = s.size.y();
  std::vector<std::pair<Vec2, Vec2>> out;
  switch (s.pattern) {
    case PatternKind::VerticalCuts:
      for (int k = 1; k <= s.count; ++k) {
        const double x = lo.x() + k * length / (s.count + 1);
        out.push_back({{x, lo.y()}, {x, lo.y() + width}});
      }
      break;
    case PatternKind::HorizontalCuts:
      for (int k = 1; k <= s.count; ++k) {
        const double y = lo.y() + k * width / (s.count + 1);
        out.push_back({{lo.x(), y}, {lo.x() + length, y}});
      }
      break;
    case PatternKind::TipCuts:
      for (double x : {lo.x() + s.tip_fraction * length, lo.x() + (1.0 - s.tip_fraction) * length}) {
        out.push_back({{x, lo.y()}, {x, lo.y() + width}});
      }
      break;
    case PatternKind::PieCuts: {
      const Vec2 c = s.object_center();
      const double r = std::min(length, width) / 2.0;
      const bool diameters = s.count % 2 == 0;
      const int lines = diameters ? s.count / 2 : s.count;
      for (int i = 0; i < lines; ++i) {
        const double theta = 2.0 * std::numbers::pi * i / s.count;
        const Vec2 d(r * std::cos(theta), r * std::sin(theta));
        if (diameters) {
          out.push_back({c - d, c + d});
        } else {
          out.push_back({c, c + d});
        }
      }
      break;
    }
    case PatternKind::Custom:
      for (const auto& p : s.custom) out.push_back({p.y0.head<2>(), p.y_goal.head<2>()});
      break;
  }
  return out;
}

std::vector<ScalingParams> ground_truth_params(const Scenario& s, const GroundTruthOptions& options) {
  s.validate();
  if (s.pattern == PatternKind::Custom) return s.custom;
  HeightSpec spec;
  spec.object_height = s.size.z();
  spec.margin = options.margin;
  spec.mode = s.height_mode;
  spec.base_z = options.base_z;
  std::vector<ScalingParams> out;
  for (const auto& [a, b] : expand_pattern(s)) out.push_back(integrate_height(a, b, spec));
  return out;
}

Trajectory generate_ground_truth(const Scenario& s, const Primitive& primitive, const GroundTruthOptions& options) {
  const auto params = ground_truth_params(s, options);
  PrimitiveDictionary dictionary;
  Primitive p = primitive;
  p.keyword = s.keyword;
  dictionary.insert(std::move(p));
  const Vec3 home = options.home.value_or(default_home(s.board));
  const MotionPlan plan = build_plan(params, s.keyword, home);
  RenderSettings settings;
  settings.dt = options.dt;
  settings.bounds = WorkspaceBounds::board(s.board.x(), s.board.y());
  return render(plan, dictionary, make_translation_primitive(primitive.gains), settings);
}

GrayImage render_fixture(const Scenario& s, double pixels_per_meter, int background) {
  s.validate();
  if (!(pixels_per_meter > 0.0)) throw Error(ErrorCode::InvalidArgument, "pixels_per_meter must be positive");
  const int w = static_cast<int>(std::lround(s.board.x() * pixels_per_meter));
  const int h = static_cast<int>(std::lround(s.board.y() * pixels_per_meter));
  GrayImage img(w, h, static_cast<std::uint8_t>(background));
  const Vec2 lo = s.object_min();
  const Vec2 hi = lo + s.size.head<2>();
  const Vec2 c = s.object_center();
  const double r = s.size.x() / 2.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Vec2 p((x + 0.5) / pixels_per_meter, (y + 0.5) / pixels_per_meter);
      const bool inside = s.shape == ObjectShape::Round
                              ? (p - c).squaredNorm() <= r * r
                              : p.x() >= lo.x() && p.x() < hi.x() && p.y() >= lo.y() && p.y() < hi.y();
      if (inside) img.at(x, y) = static_cast<std::uint8_t>(s.intensity);
    }
  }
  return img;
}

}  // namespace keymps
