#include "keymps/mock_backend.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "keymps/dictionary.hpp"
#include "keymps/error.hpp"

namespace keymps {
namespace {

using nlohmann::json;

constexpr std::string_view kBuiltinRules = R"json({
  "rules": [
    {"kind": "vertical_cuts", "pattern": "(\\d+(?:\\.\\d+)?)\\s*cm long.*?into\\s+(\\d+(?:\\.\\d+)?)\\s*cm slices",
     "length_group": 1, "slice_group": 2},
    {"kind": "vertical_cuts", "pattern": "each day of (?:this|the) week", "fixed_count": 7, "count_means": "parts"},
    {"kind": "pie_cuts", "pattern": "into (\\d+) equal (?:slices|pieces|parts)", "count_group": 1},
    {"kind": "pie_cuts", "pattern": "for (\\d+) people", "count_group": 1},
    {"kind": "horizontal_cuts", "pattern": "single horizontal slice", "fixed_count": 1, "count_means": "cuts"},
    {"kind": "horizontal_cuts", "pattern": "into (\\d+) parts horizontally", "count_group": 1, "count_means": "parts"},
    {"kind": "tip_cuts", "pattern": "both tips", "tip_fraction": 0.1},
    {"kind": "icing_dots", "pattern": "(\\d+) icings? around", "count_group": 1, "radius_fraction": 0.7}
  ],
  "hardness": [
    {"object": "baguette", "keywords": ["sawing", "forward"]},
    {"object": "bread", "keywords": ["sawing", "forward"]},
    {"object": "crust", "keywords": ["sawing", "forward"]},
    {"object": "eggplant", "keywords": ["straight", "downward"]},
    {"object": "cabbage", "keywords": ["straight", "downward"]},
    {"object": "cake", "keywords": ["straight", "downward", "line"]},
    {"object": "pizza", "keywords": ["straight", "downward"]}
  ],
  "default_keywords": ["straight", "downward", "line"]
})json";

std::string_view kind_name(MockPattern kind) {
  switch (kind) {
    case MockPattern::VerticalCuts: return "vertical_cuts";
    case MockPattern::HorizontalCuts: return "horizontal_cuts";
    case MockPattern::PieCuts: return "pie_cuts";
    case MockPattern::TipCuts: return "tip_cuts";
    case MockPattern::IcingDots: return "icing_dots";
  }
  return "vertical_cuts";
}

MockPattern kind_from(const std::string& name) {
  for (auto k : {MockPattern::VerticalCuts, MockPattern::HorizontalCuts, MockPattern::PieCuts, MockPattern::TipCuts,
                 MockPattern::IcingDots}) {
    if (kind_name(k) == name) return k;
  }
  throw Error(ErrorCode::ParseError, "unknown mock rule kind '" + name + "'");
}

double capture(const std::smatch& m, int group) {
  if (group <= 0 || static_cast<std::size_t>(group) >= m.size() || !m[group].matched) {
    throw Error(ErrorCode::ConfigError, "mock rule refers to a missing capture group");
  }
  return std::stod(m[group].str());
}

// Number of cuts (or slices / dots for pie and icing rules) requested.
long rule_count(const MockRule& rule, const std::smatch& m) {
  if (rule.length_group > 0 && rule.slice_group > 0) {
    const double slice = capture(m, rule.slice_group);
    if (!(slice > 0.0)) return 0;
    return std::lround(capture(m, rule.length_group) / slice) - 1;
  }
  const long n = rule.count_group > 0 ? std::lround(capture(m, rule.count_group)) : rule.fixed_count;
  if (rule.kind == MockPattern::PieCuts || rule.kind == MockPattern::IcingDots) return n;
  return rule.count_means == CountMeaning::Parts ? n - 1 : n;
}

Vec2 px(double x, double y) { return {static_cast<double>(std::lround(x)), static_cast<double>(std::lround(y))}; }

std::vector<KeypointPair> generate(const MockRule& rule, long count, ImageSize crop) {
  const double w = crop.width;
  const double h = crop.height;
  std::vector<KeypointPair> pairs;
  switch (rule.kind) {
    case MockPattern::VerticalCuts:
      for (long k = 1; k <= count; ++k) {
        const double x = static_cast<double>(k) * w / static_cast<double>(count + 1);
        pairs.push_back({px(x, 0.0), px(x, h)});
      }
      break;
    case MockPattern::HorizontalCuts:
      for (long k = 1; k <= count; ++k) {
        const double y = static_cast<double>(k) * h / static_cast<double>(count + 1);
        pairs.push_back({px(0.0, y), px(w, y)});
      }
      break;
    case MockPattern::TipCuts:
      for (double x : {rule.tip_fraction * w, (1.0 - rule.tip_fraction) * w}) pairs.push_back({px(x, 0.0), px(x, h)});
      break;
    case MockPattern::PieCuts: {
      if (count < 1) break;
      const double cx = w / 2.0;
      const double cy = h / 2.0;
      const double r = std::min(w, h) / 2.0;
      const bool diameters = count % 2 == 0;
      const long lines = diameters ? count / 2 : count;
      for (long i = 0; i < lines; ++i) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
        const double dx = r * std::cos(theta);
        const double dy = r * std::sin(theta);
        if (diameters) {
          pairs.push_back({px(cx - dx, cy - dy), px(cx + dx, cy + dy)});
        } else {
          pairs.push_back({px(cx, cy), px(cx + dx, cy + dy)});
        }
      }
      break;
    }
    case MockPattern::IcingDots: {
      const double r = rule.radius_fraction * std::min(w, h) / 2.0;
      for (long i = 0; i < count; ++i) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
        const Vec2 p = px(w / 2.0 + r * std::cos(theta), h / 2.0 + r * std::sin(theta));
        pairs.push_back({p, p});
      }
      break;
    }
  }
  return pairs;
}

// "Object: ..." and "Instruction: ..." lines of the user message.
std::pair<std::string, std::string> split_user_text(const std::string& text) {
  std::string object;
  std::string instruction;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    if (line.rfind("Object:", 0) == 0) object = line.substr(7);
    if (line.rfind("Instruction:", 0) == 0) instruction = line.substr(12);
  }
  if (instruction.empty()) instruction = text;
  const auto first = instruction.find_first_not_of(" \t");
  const auto last = instruction.find_last_not_of(" \t\r");
  instruction = first == std::string::npos ? std::string() : instruction.substr(first, last - first + 1);
  return {PrimitiveDictionary::normalize_keyword(object), instruction};
}

}  // namespace

MockRules MockRules::builtin() { return from_json(kBuiltinRules); }

MockRules MockRules::from_json(std::string_view text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw Error(ErrorCode::ParseError, "mock rules are not a JSON object");
  try {
    MockRules rules;
    for (const auto& r : doc.at("rules")) {
      MockRule rule;
      rule.kind = kind_from(r.at("kind").get<std::string>());
      rule.pattern = r.at("pattern").get<std::string>();
      rule.length_group = r.value("length_group", 0);
      rule.slice_group = r.value("slice_group", 0);
      rule.count_group = r.value("count_group", 0);
      rule.fixed_count = r.value("fixed_count", 0);
      rule.count_means = r.value("count_means", std::string("cuts")) == "parts" ? CountMeaning::Parts : CountMeaning::Cuts;
      rule.tip_fraction = r.value("tip_fraction", 0.1);
      rule.radius_fraction = r.value("radius_fraction", 0.7);
      try {
        std::regex check(rule.pattern, std::regex::ECMAScript | std::regex::icase);
      } catch (const std::regex_error&) {
        throw Error(ErrorCode::ConfigError, "invalid mock rule pattern '" + rule.pattern + "'");
      }
      rules.rules.push_back(std::move(rule));
    }
    for (const auto& h : doc.value("hardness", json::array())) {
      rules.hardness.push_back({h.at("object").get<std::string>(), h.at("keywords").get<std::vector<std::string>>()});
    }
    rules.default_keywords = doc.value("default_keywords", std::vector<std::string>{});
    return rules;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("mock rules: ") + e.what());
  }
}

MockRules MockRules::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read mock rules " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

std::string MockRules::to_json() const {
  json doc;
  doc["rules"] = json::array();
  for (const auto& r : rules) {
    doc["rules"].push_back({{"kind", kind_name(r.kind)},
                            {"pattern", r.pattern},
                            {"length_group", r.length_group},
                            {"slice_group", r.slice_group},
                            {"count_group", r.count_group},
                            {"fixed_count", r.fixed_count},
                            {"count_means", r.count_means == CountMeaning::Parts ? "parts" : "cuts"},
                            {"tip_fraction", r.tip_fraction},
                            {"radius_fraction", r.radius_fraction}});
  }
  doc["hardness"] = json::array();
  for (const auto& h : hardness) doc["hardness"].push_back({{"object", h.object}, {"keywords", h.keywords}});
  doc["default_keywords"] = default_keywords;
  return doc.dump(2) + "\n";
}

std::vector<KeypointPair> mock_keypoints(const MockRules& rules, std::string_view instruction, ImageSize crop) {
  const std::string text(instruction);
  for (const auto& rule : rules.rules) {
    const std::regex re(rule.pattern, std::regex::ECMAScript | std::regex::icase);
    std::smatch m;
    if (!std::regex_search(text, m, re)) continue;
    auto pairs = generate(rule, rule_count(rule, m), crop);
    if (pairs.empty()) {
      throw Error(ErrorCode::MockNoRule, "rule '" + rule.pattern + "' yields no keypoint pairs for: " + text);
    }
    return pairs;
  }
  throw Error(ErrorCode::MockNoRule, "no mock rule matches: " + text);
}

std::string mock_keyword(const MockRules& rules, std::string_view object_label,
                         const std::vector<std::string>& allowed) {
  auto available = [&](const std::string& k) {
    for (const auto& a : allowed) {
      if (PrimitiveDictionary::normalize_keyword(a) == PrimitiveDictionary::normalize_keyword(k)) return true;
    }
    return false;
  };
  const std::string label = PrimitiveDictionary::normalize_keyword(object_label);
  if (!label.empty()) {
    for (const auto& entry : rules.hardness) {
      if (label.find(PrimitiveDictionary::normalize_keyword(entry.object)) == std::string::npos) continue;
      for (const auto& k : entry.keywords) {
        if (available(k)) return k;
      }
    }
  }
  for (const auto& k : rules.default_keywords) {
    if (available(k)) return k;
  }
  return allowed.empty() ? std::string("straight") : allowed.front();
}

MockBackend::MockBackend(MockRules rules) : rules_(std::move(rules)) {}

std::string MockBackend::do_complete(const BackendRequest& request) {
  const auto [object, instruction] = split_user_text(request.user_text);
  json reply = json::object();
  if (request.expect != ReplyKind::Keypoints) {
    reply["keyword"] = mock_keyword(rules_, object, request.allowed_keywords);
  }
  if (request.expect != ReplyKind::Keyword) {
    json pairs = json::array();
    for (const auto& p : mock_keypoints(rules_, instruction, request.image_size)) {
      pairs.push_back({{std::lround(p.start.x()), std::lround(p.start.y())},
                       {std::lround(p.goal.x()), std::lround(p.goal.y())}});
    }
    reply["keypoint_pairs"] = pairs;
  }
  return reply.dump();
}

std::unique_ptr<Backend> mock_backend(MockRules rules) { return std::make_unique<MockBackend>(std::move(rules)); }

}  // namespace keymps
