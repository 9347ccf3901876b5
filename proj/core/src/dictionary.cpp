#include "keymps/dictionary.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "keymps/error.hpp"

namespace keymps {
namespace {

using nlohmann::json;

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::ParseError, std::string(what) + " must be a 3-element array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::vector<double> doubles_from(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, std::string(what) + " must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(v.get<double>());
  return out;
}

json primitive_json(const Primitive& p) {
  json weights = json::array();
  for (Eigen::Index r = 0; r < p.weights.rows(); ++r) {
    for (int c = 0; c < 3; ++c) weights.push_back(p.weights(r, c));
  }
  return {
      {"keyword", p.keyword},
      {"description", p.description},
      {"gains", {{"alpha_z", p.gains.alpha_z}, {"beta_z", p.gains.beta_z}, {"alpha_s", p.gains.alpha_s}, {"tau", p.gains.tau}}},
      {"basis", {{"count", p.basis.count()}, {"centers", p.basis.centers}, {"widths", p.basis.widths}}},
      {"weights", weights},
      {"demo_start", vec_json(p.demo_start)},
      {"demo_goal", vec_json(p.demo_goal)},
  };
}

Primitive primitive_from(const json& j) {
  Primitive p;
  p.keyword = j.at("keyword").get<std::string>();
  p.description = j.value("description", std::string{});
  const json gains = j.value("gains", json::object());
  p.gains.alpha_z = gains.value("alpha_z", 25.0);
  p.gains.beta_z = gains.value("beta_z", p.gains.alpha_z / 4.0);
  p.gains.alpha_s = gains.value("alpha_s", 3.0);
  p.gains.tau = gains.value("tau", 1.0);

  const json& basis = j.at("basis");
  p.basis.centers = doubles_from(basis.at("centers"), "basis.centers");
  p.basis.widths = doubles_from(basis.at("widths"), "basis.widths");
  if (basis.contains("count") && basis["count"].get<std::size_t>() != p.basis.count()) {
    throw Error(ErrorCode::ParseError, "basis.count does not match centers for '" + p.keyword + "'");
  }

  const json& w = j.at("weights");
  const auto n = static_cast<Eigen::Index>(p.basis.count());
  p.weights.resize(n, 3);
  if (w.is_array() && !w.empty() && w[0].is_array()) {
    if (static_cast<Eigen::Index>(w.size()) != n) throw Error(ErrorCode::ParseError, "weights row count mismatch");
    for (Eigen::Index r = 0; r < n; ++r) p.weights.row(r) = vec_from(w[r], "weights row").transpose();
  } else {
    const auto flat = doubles_from(w, "weights");
    if (static_cast<Eigen::Index>(flat.size()) != 3 * n) {
      throw Error(ErrorCode::ParseError, "weights must hold count x 3 values for '" + p.keyword + "'");
    }
    for (Eigen::Index r = 0; r < n; ++r) {
      for (int c = 0; c < 3; ++c) p.weights(r, c) = flat[static_cast<std::size_t>(3 * r + c)];
    }
  }
  p.demo_start = vec_from(j.at("demo_start"), "demo_start");
  p.demo_goal = vec_from(j.at("demo_goal"), "demo_goal");
  return p;
}

}  // namespace

PrimitiveDictionary::PrimitiveDictionary(std::string task, std::string version)
    : task_(std::move(task)), version_(std::move(version)) {}

std::string PrimitiveDictionary::normalize_keyword(std::string_view keyword) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t b = 0;
  std::size_t e = keyword.size();
  while (b < e && is_space(static_cast<unsigned char>(keyword[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(keyword[e - 1]))) --e;
  std::string out(keyword.substr(b, e - b));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void PrimitiveDictionary::insert(Primitive primitive, bool overwrite) {
  primitive.keyword = normalize_keyword(primitive.keyword);
  if (primitive.keyword.empty()) throw Error(ErrorCode::InvalidArgument, "primitive keyword is empty");
  primitive.validate();
  auto it = entries_.find(primitive.keyword);
  if (it != entries_.end()) {
    if (!overwrite) {
      throw Error(ErrorCode::RefusedOverwrite, "keyword '" + primitive.keyword + "' already exists");
    }
    it->second = std::move(primitive);
    return;
  }
  std::string key = primitive.keyword;
  entries_.emplace(std::move(key), std::move(primitive));
}

bool PrimitiveDictionary::contains(std::string_view keyword) const {
  return entries_.count(normalize_keyword(keyword)) != 0;
}

const Primitive& PrimitiveDictionary::at(std::string_view keyword) const {
  auto it = entries_.find(normalize_keyword(keyword));
  if (it == entries_.end()) {
    throw Error(ErrorCode::UnknownPrimitive, "no primitive for keyword '" + std::string(keyword) + "'");
  }
  return it->second;
}

std::vector<std::string> PrimitiveDictionary::keywords() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [k, _] : entries_) out.push_back(k);
  return out;
}

std::string PrimitiveDictionary::to_json() const {
  json entries = json::array();
  for (const auto& [_, p] : entries_) entries.push_back(primitive_json(p));
  json doc = {{"version", version_}, {"task", task_}, {"entries", entries}};
  return doc.dump(2) + "\n";
}

PrimitiveDictionary PrimitiveDictionary::from_json(std::string_view text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::ParseError, "primitive dictionary is not a JSON object");
  }
  try {
    PrimitiveDictionary dict(doc.value("task", std::string{}), doc.value("version", std::string{"1"}));
    for (const auto& entry : doc.at("entries")) dict.insert(primitive_from(entry));
    return dict;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("primitive dictionary: ") + e.what());
  }
}

void PrimitiveDictionary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << to_json();
}

PrimitiveDictionary PrimitiveDictionary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read primitive dictionary " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

const Primitive& resolve(const PrimitiveDictionary& dictionary, std::string_view keyword) {
  return dictionary.at(keyword);
}

}  // namespace keymps
