#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "keymps/backend.hpp"
#include "keymps/geometry.hpp"

namespace keymps {

enum class MockPattern { VerticalCuts, HorizontalCuts, PieCuts, TipCuts, IcingDots };
enum class CountMeaning { Cuts, Parts };

// One instruction pattern -> keypoint generator mapping. Patterns are
// case-insensitive ECMAScript regular expressions.
struct MockRule {
  MockPattern kind = MockPattern::VerticalCuts;
  std::string pattern;
  int length_group = 0;  // capture holding the object length (cm)
  int slice_group = 0;   // capture holding the slice thickness (cm)
  int count_group = 0;   // capture holding a count
  int fixed_count = 0;   // count when no capture is used
  CountMeaning count_means = CountMeaning::Cuts;
  double tip_fraction = 0.1;     // TipCuts: distance of each cut from its end, fraction of the width
  double radius_fraction = 0.7;  // IcingDots: circle radius, fraction of the half extent
};

struct HardnessEntry {
  std::string object;                  // substring matched against the object label
  std::vector<std::string> keywords;  // preference order
};

struct MockRules {
  std::vector<MockRule> rules;
  std::vector<HardnessEntry> hardness;
  std::vector<std::string> default_keywords;

  static MockRules builtin();
  static MockRules from_json(std::string_view text);
  static MockRules load(const std::filesystem::path& path);
  std::string to_json() const;
};

// Deterministic keypoint generator, integer pixel coordinates, crop frame.
// Throws MockNoRule when no rule matches or the rule yields no pairs.
std::vector<KeypointPair> mock_keypoints(const MockRules& rules, std::string_view instruction, ImageSize crop);

std::string mock_keyword(const MockRules& rules, std::string_view object_label,
                         const std::vector<std::string>& allowed);

// Answers from the instruction text and crop size alone; never touches the network.
class MockBackend final : public Backend {
 public:
  explicit MockBackend(MockRules rules = MockRules::builtin());

  bool uses_network() const noexcept override { return false; }
  std::string name() const override { return "mock"; }
  const MockRules& rules() const noexcept { return rules_; }

 protected:
  std::string do_complete(const BackendRequest& request) override;

 private:
  MockRules rules_;
};

std::unique_ptr<Backend> mock_backend(MockRules rules = MockRules::builtin());

}  // namespace keymps
