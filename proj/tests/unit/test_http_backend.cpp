#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "keymps/error.hpp"
#include "keymps/http_backend.hpp"

using namespace keymps;
using nlohmann::json;

namespace {

// Local chat-completions stand-in on an ephemeral port.
class FakeServer {
 public:
  explicit FakeServer(httplib::Server::Handler handler) {
    server_.Post("/v1/chat/completions", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

BackendRequest sample_request() {
  BackendRequest r;
  r.system_prompt = "system text";
  r.user_text = "Instruction: cut\n";
  r.image = GrayImage(4, 3, 90);
  r.image_size = {4, 3};
  return r;
}

std::string reply_body(const std::string& text) {
  return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", text}}}}})}}.dump();
}

}  // namespace

TEST_CASE("request body carries prompt, text and image") {
  HttpBackendConfig cfg{.url = "http://localhost/x", .model = "vision-model", .temperature = 0.25};
  BackendRequest req = sample_request();
  req.retry_context = {{"assistant", "oops"}, {"user", "try again"}};
  const json body = json::parse(build_chat_request_json(cfg, req));
  CHECK(body["model"] == "vision-model");
  CHECK(body["temperature"] == 0.25);
  const auto& messages = body["messages"];
  REQUIRE(messages.size() == 4);
  CHECK(messages[0]["role"] == "system");
  CHECK(messages[0]["content"] == "system text");
  CHECK(messages[1]["content"][0]["text"] == "Instruction: cut\n");
  const std::string url = messages[1]["content"][1]["image_url"]["url"];
  CHECK(url.rfind("data:image/png;base64,iVBORw0KGgo", 0) == 0);
  CHECK(messages[3]["content"] == "try again");
}

TEST_CASE("reply text extraction") {
  CHECK(extract_reply_text(reply_body("{\"keyword\": \"straight\"}")) == "{\"keyword\": \"straight\"}");
  const json parts = {{"choices", {{{"message", {{"content", {{{"type", "text"}, {"text", "a"}}, {{"type", "text"}, {"text", "b"}}}}}}}}}};
  CHECK(extract_reply_text(parts.dump()) == "ab");
  for (const char* bad : {"", "[]", "{\"choices\": []}", "{\"error\": {\"message\": \"quota\"}}",
                          "{\"choices\": [{\"message\": {}}]}"}) {
    try {
      extract_reply_text(bad);
      FAIL("expected BackendUnavailable for " << bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BackendUnavailable);
    }
  }
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(HttpBackendConfig{}.validate(), Error);
  CHECK_THROWS_AS((HttpBackendConfig{.url = "ftp://x", .model = "m"}.validate()), Error);
  CHECK_THROWS_AS((HttpBackendConfig{.url = "http://x", .model = ""}.validate()), Error);
  CHECK_NOTHROW((HttpBackendConfig{.url = "http://x", .model = "m"}.validate()));
}

TEST_CASE("round trip against a local server") {
  std::string seen_auth;
  std::string seen_model;
  FakeServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_model = json::parse(req.body)["model"];
    res.set_content(reply_body("ok"), "application/json");
  });
  ::setenv("KEYMPS_TEST_HTTP_KEY", "secret-123", 1);
  HttpBackend backend({.url = server.url(), .model = "m1", .api_key_env = "KEYMPS_TEST_HTTP_KEY", .timeout_s = 5});
  CHECK(backend.uses_network());
  CHECK(backend.complete(sample_request()) == "ok");
  CHECK(seen_auth == "Bearer secret-123");
  CHECK(seen_model == "m1");
}

TEST_CASE("server errors are retried then reported") {
  std::atomic<int> hits{0};
  FakeServer server([&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 500;
  });
  HttpBackend backend({.url = server.url(), .model = "m", .timeout_s = 5, .transport_retries = 2});
  try {
    backend.complete(sample_request());
    FAIL("expected BackendUnavailable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BackendUnavailable);
    CHECK(e.attempts() == 3);
  }
  CHECK(hits == 3);
}

TEST_CASE("client errors fail without retrying") {
  std::atomic<int> hits{0};
  FakeServer server([&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 401;
    res.set_content("no key", "text/plain");
  });
  HttpBackend backend({.url = server.url(), .model = "m", .timeout_s = 5});
  CHECK_THROWS_AS(backend.complete(sample_request()), Error);
  CHECK(hits == 1);
}

TEST_CASE("a transient failure recovers") {
  std::atomic<int> hits{0};
  FakeServer server([&](const httplib::Request&, httplib::Response& res) {
    if (++hits == 1) {
      res.status = 503;
      return;
    }
    res.set_content(reply_body("second"), "application/json");
  });
  HttpBackend backend({.url = server.url(), .model = "m", .timeout_s = 5});
  CHECK(backend.complete(sample_request()) == "second");
}

TEST_CASE("unreachable endpoint is BackendUnavailable") {
  // Bind then release a port so nothing listens there.
  int port = 0;
  {
    httplib::Server s;
    port = s.bind_to_any_port("127.0.0.1");
  }
  HttpBackend backend({.url = "http://127.0.0.1:" + std::to_string(port) + "/v1", .model = "m", .timeout_s = 1,
                       .transport_retries = 0});
  try {
    backend.complete(sample_request());
    FAIL("expected BackendUnavailable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BackendUnavailable);
    CHECK(e.attempts() == 1);
  }
}
