#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "keymps/backend.hpp"
#include "keymps/dictionary.hpp"
#include "keymps/geometry.hpp"

namespace keymps {

struct KeywordOption {
  std::string keyword;
  std::string description;
};

struct TaskContext {
  std::string task_name;
  std::vector<KeywordOption> keywords;
  std::string instruction;
  std::string object_label;  // optional, e.g. "eggplant"
  ImageSize crop_size;
  std::optional<GrayImage> crop;
  std::vector<std::string> examples;

  void validate() const;
};

// Keyword options listing every dictionary entry, so a validated keyword
// always resolves.
std::vector<KeywordOption> keyword_options(const PrimitiveDictionary& dictionary);

struct VlmResponse {
  std::string keyword;
  std::vector<KeypointPair> pairs;
  std::string raw;   // verbatim reply text(s)
  int attempts = 1;  // backend calls used
};

enum class KeypointPolicy { Reject, Clamp };

struct QueryOptions {
  bool combined = true;  // one request for keyword and keypoints
  int max_retries = 2;   // extra attempts after a MalformedResponse
  KeypointPolicy out_of_bounds = KeypointPolicy::Reject;
};

std::string build_keyword_prompt(const TaskContext& ctx);
std::string build_keypoint_prompt(const TaskContext& ctx);
std::string build_combined_prompt(const TaskContext& ctx);
std::string build_user_message(const TaskContext& ctx);

// First balanced {...} in the text, skipping braces inside JSON strings.
std::optional<std::string_view> extract_json_object(std::string_view text);

// Typed validation of one reply. Errors: MalformedResponse (raw attached),
// UnknownKeyword, InvalidKeypoint (pair index).
std::string parse_keyword_reply(std::string_view raw, const TaskContext& ctx);
std::vector<KeypointPair> parse_keypoint_reply(std::string_view raw, const TaskContext& ctx,
                                               KeypointPolicy policy = KeypointPolicy::Reject);
VlmResponse parse_combined_reply(std::string_view raw, const TaskContext& ctx,
                                 KeypointPolicy policy = KeypointPolicy::Reject);

VlmResponse query(Backend& backend, const TaskContext& ctx, const QueryOptions& options = {});

}  // namespace keymps
