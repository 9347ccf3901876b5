#include "keymps/vlm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "keymps/error.hpp"

namespace keymps {
namespace {

using nlohmann::json;

constexpr std::string_view kKeywordContract =
    R"(Reply with a single JSON object of the form {"keyword": "<one of the primitives above>"} and nothing else.)";
constexpr std::string_view kKeypointContract =
    R"(Reply with a single JSON object of the form {"keypoint_pairs": [[[x1, y1], [x2, y2]], ...]} in pixel coordinates of this image, and nothing else.)";
constexpr std::string_view kCombinedContract =
    R"(Reply with a single JSON object of the form {"keyword": "<one of the primitives above>", "keypoint_pairs": [[[x1, y1], [x2, y2]], ...]} in pixel coordinates of this image, and nothing else.)";

std::string task_name(const TaskContext& ctx) { return ctx.task_name.empty() ? "object manipulation" : ctx.task_name; }

void append_examples(std::ostringstream& out, const TaskContext& ctx) {
  if (ctx.examples.empty()) return;
  out << "\nExamples:\n";
  for (const auto& e : ctx.examples) out << "- " << e << "\n";
}

void keyword_section(std::ostringstream& out, const TaskContext& ctx) {
  out << "Primitive selection for the task: " << task_name(ctx) << ".\n"
      << "You receive a top-down image of the object and the user's instruction. Choose the motion "
         "primitive whose style suits the object's properties (hardness, texture, shape) and the "
         "instruction.\n\nAvailable primitives:\n";
  for (const auto& k : ctx.keywords) {
    out << "- " << k.keyword;
    if (!k.description.empty()) out << ": " << k.description;
    out << "\n";
  }
}

void keypoint_section(std::ostringstream& out, const TaskContext& ctx) {
  out << "Keypoint pairs generation for the task: " << task_name(ctx) << ".\n"
      << "The image is " << ctx.crop_size.width << " by " << ctx.crop_size.height
      << " pixels; x grows to the right from 0 to " << ctx.crop_size.width << " and y grows downward from 0 to "
      << ctx.crop_size.height << ".\n"
      << "Translate the desired outcome into line segments, one per sub-motion, listed in execution order. "
         "Each segment is a pair of pixel keypoints [start, goal]. Decide the number of pairs from the "
         "instruction and the image. A pair whose start equals its goal marks a single spot.\n";
}

bool finite_number(const json& j) { return j.is_number() && std::isfinite(j.get<double>()); }

Error malformed(const std::string& why, std::string_view raw) {
  return Error(ErrorCode::MalformedResponse, why, {.raw = std::string(raw)});
}

json parse_object(std::string_view raw) {
  const auto object = extract_json_object(raw);
  if (!object) throw malformed("reply contains no JSON object", raw);
  json doc = json::parse(*object, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw malformed("reply JSON does not parse", raw);
  return doc;
}

std::string keyword_from(const json& doc, std::string_view raw, const TaskContext& ctx) {
  auto it = doc.find("keyword");
  if (it == doc.end() || !it->is_string()) throw malformed("reply lacks a string \"keyword\" field", raw);
  const std::string keyword = PrimitiveDictionary::normalize_keyword(it->get<std::string>());
  for (const auto& option : ctx.keywords) {
    if (PrimitiveDictionary::normalize_keyword(option.keyword) == keyword) return keyword;
  }
  throw Error(ErrorCode::UnknownKeyword, "keyword '" + keyword + "' is not an available primitive",
              {.raw = std::string(raw)});
}

std::vector<KeypointPair> pairs_from(const json& doc, std::string_view raw, const TaskContext& ctx,
                                     KeypointPolicy policy) {
  auto it = doc.find("keypoint_pairs");
  if (it == doc.end() || !it->is_array()) throw malformed("reply lacks a \"keypoint_pairs\" array", raw);
  if (it->empty()) throw malformed("\"keypoint_pairs\" is empty", raw);

  const double w = ctx.crop_size.width;
  const double h = ctx.crop_size.height;
  std::vector<KeypointPair> pairs;
  pairs.reserve(it->size());
  for (std::size_t i = 0; i < it->size(); ++i) {
    const json& pair = (*it)[i];
    if (!pair.is_array() || pair.size() != 2) {
      throw malformed("keypoint pair " + std::to_string(i) + " is not [start, goal]", raw);
    }
    Vec2 pts[2];
    for (std::size_t k = 0; k < 2; ++k) {
      const json& p = pair[k];
      if (!p.is_array() || p.size() != 2 || !finite_number(p[0]) || !finite_number(p[1])) {
        throw malformed("keypoint pair " + std::to_string(i) + " has a non-numeric point", raw);
      }
      pts[k] = {p[0].get<double>(), p[1].get<double>()};
      const bool inside = pts[k].x() >= 0.0 && pts[k].y() >= 0.0 && pts[k].x() <= w && pts[k].y() <= h;
      if (!inside) {
        if (policy == KeypointPolicy::Reject) {
          throw Error(ErrorCode::InvalidKeypoint, "keypoint pair " + std::to_string(i) + " lies outside the image",
                      {.index = i, .raw = std::string(raw)});
        }
        pts[k] = {std::clamp(pts[k].x(), 0.0, w), std::clamp(pts[k].y(), 0.0, h)};
      }
    }
    pairs.push_back({pts[0], pts[1]});
  }
  return pairs;
}

template <typename Parse>
auto ask(Backend& backend, BackendRequest request, const QueryOptions& options, Parse parse, int& attempts,
         std::string& raw_out) {
  for (int attempt = 0;; ++attempt) {
    ++attempts;
    std::string raw = backend.complete(request);
    try {
      auto result = parse(raw);
      raw_out = std::move(raw);
      return result;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MalformedResponse || attempt >= options.max_retries) {
        ErrorDetail detail = e.detail();
        detail.attempts = attempts;
        throw Error(e.code(), e.message(), detail);
      }
      request.retry_context.push_back({"assistant", raw});
      request.retry_context.push_back(
          {"user", std::string("Your previous reply could not be used (") + e.message() +
                       "). Reply again with only the JSON object described in the instructions."});
    }
  }
}

}  // namespace

void TaskContext::validate() const {
  if (keywords.empty()) throw Error(ErrorCode::InvalidArgument, "task context lists no primitive keywords");
  if (instruction.empty()) throw Error(ErrorCode::InvalidArgument, "task context has an empty instruction");
  if (crop_size.width < 1 || crop_size.height < 1) {
    throw Error(ErrorCode::InvalidArgument, "task context has no crop size");
  }
}

std::vector<KeywordOption> keyword_options(const PrimitiveDictionary& dictionary) {
  std::vector<KeywordOption> out;
  for (const auto& [keyword, primitive] : dictionary.entries()) out.push_back({keyword, primitive.description});
  return out;
}

std::string build_keyword_prompt(const TaskContext& ctx) {
  ctx.validate();
  std::ostringstream out;
  keyword_section(out, ctx);
  append_examples(out, ctx);
  out << "\n" << kKeywordContract << "\n";
  return out.str();
}

std::string build_keypoint_prompt(const TaskContext& ctx) {
  ctx.validate();
  std::ostringstream out;
  keypoint_section(out, ctx);
  append_examples(out, ctx);
  out << "\n" << kKeypointContract << "\n";
  return out.str();
}

std::string build_combined_prompt(const TaskContext& ctx) {
  ctx.validate();
  std::ostringstream out;
  keyword_section(out, ctx);
  out << "\n";
  keypoint_section(out, ctx);
  append_examples(out, ctx);
  out << "\n" << kCombinedContract << "\n";
  return out.str();
}

std::string build_user_message(const TaskContext& ctx) {
  std::ostringstream out;
  if (!ctx.object_label.empty()) out << "Object: " << ctx.object_label << "\n";
  out << "Instruction: " << ctx.instruction << "\n";
  return out.str();
}

std::optional<std::string_view> extract_json_object(std::string_view text) {
  const std::size_t begin = text.find('{');
  if (begin == std::string_view::npos) return std::nullopt;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = begin; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return text.substr(begin, i - begin + 1);
    }
  }
  return std::nullopt;
}

std::string parse_keyword_reply(std::string_view raw, const TaskContext& ctx) {
  const json doc = parse_object(raw);
  return keyword_from(doc, raw, ctx);
}

std::vector<KeypointPair> parse_keypoint_reply(std::string_view raw, const TaskContext& ctx, KeypointPolicy policy) {
  const json doc = parse_object(raw);
  return pairs_from(doc, raw, ctx, policy);
}

VlmResponse parse_combined_reply(std::string_view raw, const TaskContext& ctx, KeypointPolicy policy) {
  const json doc = parse_object(raw);
  VlmResponse response;
  response.keyword = keyword_from(doc, raw, ctx);
  response.pairs = pairs_from(doc, raw, ctx, policy);
  response.raw = std::string(raw);
  return response;
}

VlmResponse query(Backend& backend, const TaskContext& ctx, const QueryOptions& options) {
  ctx.validate();
  BackendRequest base;
  base.user_text = build_user_message(ctx);
  base.image = ctx.crop;
  base.image_size = ctx.crop_size;
  for (const auto& k : ctx.keywords) base.allowed_keywords.push_back(k.keyword);

  VlmResponse response;
  int attempts = 0;
  if (options.combined) {
    BackendRequest request = base;
    request.system_prompt = build_combined_prompt(ctx);
    request.expect = ReplyKind::Combined;
    std::string raw;
    response = ask(
        backend, request, options,
        [&](const std::string& text) { return parse_combined_reply(text, ctx, options.out_of_bounds); }, attempts,
        raw);
    response.raw = raw;
  } else {
    BackendRequest keyword_request = base;
    keyword_request.system_prompt = build_keyword_prompt(ctx);
    keyword_request.expect = ReplyKind::Keyword;
    std::string keyword_raw;
    response.keyword = ask(
        backend, keyword_request, options, [&](const std::string& text) { return parse_keyword_reply(text, ctx); },
        attempts, keyword_raw);

    BackendRequest keypoint_request = base;
    keypoint_request.system_prompt = build_keypoint_prompt(ctx);
    keypoint_request.expect = ReplyKind::Keypoints;
    std::string keypoint_raw;
    response.pairs = ask(
        backend, keypoint_request, options,
        [&](const std::string& text) { return parse_keypoint_reply(text, ctx, options.out_of_bounds); }, attempts,
        keypoint_raw);
    response.raw = keyword_raw + "\n---\n" + keypoint_raw;
  }
  response.attempts = attempts;
  return response;
}

}  // namespace keymps
