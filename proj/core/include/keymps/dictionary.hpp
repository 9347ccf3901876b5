#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "keymps/dmp.hpp"

namespace keymps {

// Keyword -> learned primitive. Keywords are stored trimmed and lowercased.
//
// File format (JSON):
//   {"version": "1", "task": "...",
//    "entries": [{"keyword", "description", "gains": {alpha_z, beta_z, alpha_s, tau},
//                 "basis": {"count", "centers", "widths"},
//                 "weights": [row-major N x 3], "demo_start", "demo_goal"}]}
// Missing gains fall back to alpha_z = 25, beta_z = 6.25, alpha_s = 3, tau = 1.
class PrimitiveDictionary {
 public:
  explicit PrimitiveDictionary(std::string task = {}, std::string version = "1");

  static std::string normalize_keyword(std::string_view keyword);

  // Throws RefusedOverwrite when the keyword exists and overwrite is false.
  void insert(Primitive primitive, bool overwrite = false);

  bool contains(std::string_view keyword) const;
  const Primitive& at(std::string_view keyword) const;
  std::vector<std::string> keywords() const;
  const std::map<std::string, Primitive>& entries() const noexcept { return entries_; }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::string& task() const noexcept { return task_; }
  const std::string& version() const noexcept { return version_; }
  void set_task(std::string task) { task_ = std::move(task); }

  std::string to_json() const;
  static PrimitiveDictionary from_json(std::string_view text);

  void save(const std::filesystem::path& path) const;
  static PrimitiveDictionary load(const std::filesystem::path& path);

 private:
  std::string task_;
  std::string version_;
  std::map<std::string, Primitive> entries_;
};

// Lookup after trimming and lowercasing; UnknownPrimitive on a miss.
const Primitive& resolve(const PrimitiveDictionary& dictionary, std::string_view keyword);

}  // namespace keymps
