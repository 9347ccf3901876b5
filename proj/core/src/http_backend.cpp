#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "keymps/http_backend.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "keymps/error.hpp"

namespace keymps {
namespace {

using nlohmann::json;

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::ConfigError, "backend url lacks a scheme: " + url);
  const auto path_begin = url.find('/', scheme_end + 3);
  if (path_begin == std::string::npos) return {url, "/"};
  return {url.substr(0, path_begin), url.substr(path_begin)};
}

Error unavailable(const std::string& why, int attempts) {
  return Error(ErrorCode::BackendUnavailable, why, {.attempts = attempts});
}

}  // namespace

void HttpBackendConfig::validate() const {
  if (url.empty()) throw Error(ErrorCode::ConfigError, "http backend needs a url");
  if (url.rfind("http://", 0) != 0 && url.rfind("https://", 0) != 0) {
    throw Error(ErrorCode::ConfigError, "http backend url must start with http:// or https://");
  }
  if (model.empty()) throw Error(ErrorCode::ConfigError, "http backend needs a model name");
  if (!(timeout_s > 0.0)) throw Error(ErrorCode::ConfigError, "http backend timeout must be positive");
  if (transport_retries < 0) throw Error(ErrorCode::ConfigError, "transport_retries must be >= 0");
}

std::string build_chat_request_json(const HttpBackendConfig& config, const BackendRequest& request) {
  json user_content = json::array();
  user_content.push_back({{"type", "text"}, {"text", request.user_text}});
  if (request.image) {
    const std::string url = "data:image/png;base64," + base64_encode(encode_png(*request.image));
    user_content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
  }
  json messages = json::array();
  messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
  messages.push_back({{"role", "user"}, {"content", user_content}});
  for (const auto& turn : request.retry_context) messages.push_back({{"role", turn.role}, {"content", turn.content}});

  json body = {{"model", config.model}, {"messages", messages}, {"temperature", config.temperature}};
  return body.dump();
}

std::string extract_reply_text(const std::string& body) {
  const json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw unavailable("backend response body is not JSON", 1);
  const auto choices = doc.find("choices");
  if (choices == doc.end() || !choices->is_array() || choices->empty()) {
    if (auto err = doc.find("error"); err != doc.end()) throw unavailable("backend error: " + err->dump(), 1);
    throw unavailable("backend response has no choices", 1);
  }
  const json& first = (*choices)[0];
  if (!first.contains("message") || !first["message"].contains("content")) {
    throw unavailable("first choice carries no message content", 1);
  }
  const json& content = first["message"]["content"];
  if (content.is_string()) return content.get<std::string>();
  // Some servers return content as a list of typed parts.
  if (content.is_array()) {
    std::string text;
    for (const auto& part : content) {
      if (part.is_object() && part.value("type", "") == "text") text += part.value("text", "");
    }
    return text;
  }
  throw unavailable("first choice content is neither text nor parts", 1);
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) { config_.validate(); }

std::string HttpBackend::do_complete(const BackendRequest& request) {
  const Endpoint endpoint = split_url(config_.url);
  const std::string payload = build_chat_request_json(config_, request);

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr && *key != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  httplib::Client client(endpoint.origin);
  const auto timeout = std::chrono::duration<double>(config_.timeout_s);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  std::string last_error;
  const int attempts = config_.transport_retries + 1;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    auto result = client.Post(endpoint.path, headers, payload, "application/json");
    if (!result) {
      last_error = "transport error: " + httplib::to_string(result.error());
    } else if (result->status >= 500 || result->status == 429) {
      last_error = "server returned HTTP " + std::to_string(result->status);
    } else if (result->status != 200) {
      throw unavailable("server returned HTTP " + std::to_string(result->status) + ": " + result->body, attempt);
    } else {
      try {
        return extract_reply_text(result->body);
      } catch (const Error& e) {
        throw unavailable(e.message(), attempt);
      }
    }
    if (attempt < attempts) std::this_thread::sleep_for(std::chrono::milliseconds(200 * attempt));
  }
  throw unavailable(last_error + " after " + std::to_string(attempts) + " attempt(s)", attempts);
}

std::unique_ptr<Backend> http_backend(HttpBackendConfig config) {
  return std::make_unique<HttpBackend>(std::move(config));
}

}  // namespace keymps
