#pragma once

#include <memory>
#include <string>

#include "keymps/backend.hpp"

namespace keymps {

struct HttpBackendConfig {
  std::string url;  // full endpoint, e.g. https://host/v1/chat/completions
  std::string model;
  std::string api_key_env = "KEYMPS_API_KEY";
  double timeout_s = 60.0;
  int transport_retries = 2;
  double temperature = 0.0;

  void validate() const;
};

// Chat-completions request body: system prompt, user text plus the crop as a
// base-64 PNG data URL, then any retry turns.
std::string build_chat_request_json(const HttpBackendConfig& config, const BackendRequest& request);

// Text of the first choice. Throws BackendUnavailable on an unexpected body.
std::string extract_reply_text(const std::string& body);

class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  bool uses_network() const noexcept override { return true; }
  std::string name() const override { return "http"; }
  const HttpBackendConfig& config() const noexcept { return config_; }

 protected:
  std::string do_complete(const BackendRequest& request) override;

 private:
  HttpBackendConfig config_;
};

std::unique_ptr<Backend> http_backend(HttpBackendConfig config);

}  // namespace keymps
