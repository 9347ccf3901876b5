#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "keymps/image.hpp"

namespace keymps {

struct ImageSize {
  int width = 0;
  int height = 0;
};

// What the reply is expected to contain.
enum class ReplyKind { Combined, Keyword, Keypoints };

struct ChatTurn {
  std::string role;  // "assistant" or "user"
  std::string content;
};

struct BackendRequest {
  std::string system_prompt;
  std::string user_text;
  std::optional<GrayImage> image;  // object crop, sent as PNG by networked backends
  ImageSize image_size;
  std::vector<std::string> allowed_keywords;
  ReplyKind expect = ReplyKind::Combined;
  std::vector<ChatTurn> retry_context;  // earlier reply and correction, on retries
};

// A vision-language model endpoint. complete() returns the raw reply text or
// throws BackendUnavailable.
class Backend {
 public:
  virtual ~Backend() = default;

  std::string complete(const BackendRequest& request) {
    ++calls_;
    return do_complete(request);
  }

  std::size_t calls() const noexcept { return calls_; }
  virtual bool uses_network() const noexcept = 0;
  virtual std::string name() const = 0;

 protected:
  virtual std::string do_complete(const BackendRequest& request) = 0;

 private:
  std::size_t calls_ = 0;
};

}  // namespace keymps
