#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "mocot/backend/encoding.hpp"
#include "mocot/backend/errors.hpp"
#include "mocot/backend/http_backend.hpp"
#include "mocot/backend/mock_backend.hpp"
#include "mocot/backend/transcript.hpp"
#include "mocot/backend/wire.hpp"
#include "support/scripted.hpp"

using namespace mocot::backend;
using testing_support::FnBackend;

namespace {

std::vector<ChatMessage> hello() { return {ChatMessage::system("sys"), ChatMessage::user("hello")}; }

BackendConfig mock_config() { return {}; }

RetryPolicy fast_policy(int attempts) { return {attempts, std::chrono::milliseconds(10), 2.0, std::chrono::milliseconds(500)}; }

struct Recorder {
  std::vector<std::chrono::milliseconds> sleeps;
  SleepFn fn() {
    return [this](std::chrono::milliseconds d) { sleeps.push_back(d); };
  }
};

}  // namespace

TEST(Encoding, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Encoding, Base64RoundTripAndRejectsGarbage) {
  EXPECT_EQ(base64_encode("hello"), "aGVsbG8=");
  EXPECT_EQ(base64_decode("aGVsbG8="), "hello");
  EXPECT_FALSE(base64_decode("not base64!").has_value());
}

TEST(Wire, EncodesTextAndImageParts) {
  ImageRef image{ImageRef::Source::url, "https://example.org/c.png", ""};
  const auto wire = encode_messages({ChatMessage::system("s"), ChatMessage::user("q", image)});
  ASSERT_EQ(wire.size(), 2u);
  EXPECT_EQ(wire[0]["role"], "system");
  EXPECT_EQ(wire[0]["content"], "s");
  EXPECT_EQ(wire[1]["content"][0]["type"], "image_url");
  EXPECT_EQ(wire[1]["content"][0]["image_url"]["url"], "https://example.org/c.png");
  EXPECT_EQ(wire[1]["content"][1]["type"], "text");
}

TEST(Wire, FileImagesBecomeDataUrlsAndDecodeBack) {
  const auto png = testing_support::data_path("fixtures/pipeline/panel.png");
  ImageRef image{ImageRef::Source::file_path, png.string(), ""};
  const auto wire = encode_messages({ChatMessage::user("q", image)});
  const std::string url = wire[0]["content"][0]["image_url"]["url"];
  EXPECT_EQ(url.rfind("data:image/png;base64,", 0), 0u);
  const auto decoded = decode_messages(wire);
  ASSERT_EQ(decoded[0].parts.size(), 2u);
  EXPECT_EQ(decoded[0].parts[0].image().source, ImageRef::Source::base64_payload);
  EXPECT_EQ(decoded[0].parts[0].image().media_type, "image/png");
}

TEST(Wire, RequestCarriesModelSettings) {
  BackendConfig config;
  config.model_name = "m";
  config.temperature = 0.7;
  config.max_output_tokens = 77;
  const auto body = encode_request(hello(), config);
  EXPECT_EQ(body["model"], "m");
  EXPECT_DOUBLE_EQ(body["temperature"].get<double>(), 0.7);
  EXPECT_EQ(body["max_tokens"], 77);
}

TEST(Wire, DecodeResponseReadsFirstChoice) {
  const auto body = nlohmann::json::parse(
      R"({"choices":[{"message":{"role":"assistant","content":"hi"},"finish_reason":"length"}],
          "usage":{"prompt_tokens":3,"completion_tokens":1}})");
  const auto response = decode_response(body);
  EXPECT_EQ(response.text, "hi");
  EXPECT_EQ(response.finish_reason, FinishReason::length);
  ASSERT_TRUE(response.usage.has_value());
  EXPECT_EQ(response.usage->prompt_tokens, 3);
  EXPECT_THROW(decode_response(nlohmann::json::parse(R"({"choices":[]})")), MalformedResponseError);
}

TEST(Wire, RequestKeyIsStableAndContentSensitive) {
  EXPECT_EQ(request_key(hello()), request_key(hello()));
  EXPECT_NE(request_key(hello()), request_key({ChatMessage::system("sys"), ChatMessage::user("hello!")}));
  EXPECT_EQ(request_key(hello()).size(), 64u);
}

TEST(Wire, FileImageKeyDependsOnBytesNotPath) {
  const auto dir = testing_support::temp_dir("wire-key");
  const auto src = testing_support::data_path("fixtures/pipeline/panel.png");
  std::filesystem::copy_file(src, dir / "copy.png");
  const auto key_a = request_key({ChatMessage::user("q", {ImageRef::Source::file_path, src.string(), ""})});
  const auto key_b = request_key({ChatMessage::user("q", {ImageRef::Source::file_path, (dir / "copy.png").string(), ""})});
  EXPECT_EQ(key_a, key_b);
}

TEST(Complete, EmptyMessagesArePreconditionErrors) {
  auto backend = FnBackend::constant("x");
  EXPECT_THROW(backend.complete({}, mock_config()), PreconditionError);
  EXPECT_EQ(backend.calls(), 0);
}

TEST(Complete, SystemMessageWithImageIsRejected) {
  auto backend = FnBackend::constant("x");
  ChatMessage bad = ChatMessage::system("s");
  bad.parts.push_back(ContentPart::image({ImageRef::Source::url, "https://x/y.png", ""}));
  EXPECT_THROW(backend.complete({bad}, mock_config()), PreconditionError);
}

TEST(Retry, TwoTransientFailuresThenSuccess) {
  int calls = 0;
  FnBackend backend([&](const auto&) -> ChatResponse {
    if (++calls <= 2) throw NetworkError("down");
    return {"ok", FinishReason::stop, {}};
  });
  Recorder sleeps;
  const auto outcome = complete_with_retry(backend, hello(), mock_config(), fast_policy(3), sleeps.fn());
  EXPECT_EQ(outcome.response.text, "ok");
  EXPECT_EQ(outcome.attempts, 3);
  ASSERT_EQ(sleeps.sleeps.size(), 2u);
  EXPECT_EQ(sleeps.sleeps[0].count(), 10);
  EXPECT_EQ(sleeps.sleeps[1].count(), 20);
}

TEST(Retry, ClientErrorFailsImmediately) {
  FnBackend backend([](const auto&) -> ChatResponse { throw HttpStatusError(400, "bad request"); });
  Recorder sleeps;
  EXPECT_THROW(complete_with_retry(backend, hello(), mock_config(), fast_policy(3), sleeps.fn()), HttpStatusError);
  EXPECT_EQ(backend.calls(), 1);
  EXPECT_TRUE(sleeps.sleeps.empty());
}

TEST(Retry, AllTransientFailuresExhaust) {
  FnBackend backend([](const auto&) -> ChatResponse { throw HttpStatusError(503, "busy"); });
  Recorder sleeps;
  try {
    complete_with_retry(backend, hello(), mock_config(), fast_policy(3), sleeps.fn());
    FAIL() << "expected RetriesExhaustedError";
  } catch (const RetriesExhaustedError& e) {
    EXPECT_EQ(e.attempts(), 3);
  }
  EXPECT_EQ(backend.calls(), 3);
}

TEST(Retry, BackoffDelayGrowsGeometrically) {
  const RetryPolicy policy{5, std::chrono::milliseconds(100), 3.0, std::chrono::milliseconds(1000)};
  EXPECT_EQ(backoff_delay(policy, 1).count(), 0);
  EXPECT_EQ(backoff_delay(policy, 2).count(), 100);
  EXPECT_EQ(backoff_delay(policy, 4).count(), 900);
}

TEST(Mock, ReturnsScriptedTextVerbatim) {
  const std::string text = "  {\"answer\": [\"A\"]}\n";
  MockBackend mock({{request_key(hello()), text, FinishReason::stop}});
  EXPECT_EQ(mock.complete(hello(), mock_config()).text, text);
  EXPECT_EQ(mock.hits(request_key(hello())), 1);
  EXPECT_TRUE(mock.unused_keys().empty());
}

TEST(Mock, MissNamesTheKey) {
  MockBackend mock({});
  const auto key = request_key(hello());
  try {
    mock.complete(hello(), mock_config());
    FAIL() << "expected MockMissError";
  } catch (const MockMissError& e) {
    EXPECT_EQ(e.key(), key);
    EXPECT_NE(std::string(e.what()).find(key), std::string::npos);
  }
}

TEST(Mock, RepeatedKeysServeInOrderThenRepeatLast) {
  const auto key = request_key(hello());
  MockBackend mock({{key, "first", FinishReason::stop}, {key, "second", FinishReason::stop}});
  EXPECT_EQ(mock.complete(hello(), mock_config()).text, "first");
  EXPECT_EQ(mock.complete(hello(), mock_config()).text, "second");
  EXPECT_EQ(mock.complete(hello(), mock_config()).text, "second");
}

TEST(Mock, MalformedScriptReportsLine) {
  try {
    parse_mock_script("[\n  {\"key\": \"ab\",\n   \"response\": oops}\n]");
    FAIL() << "expected MockScriptError";
  } catch (const MockScriptError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(parse_mock_script("{}"), MockScriptError);
  EXPECT_THROW(parse_mock_script(R"([{"key": "zz", "response": "x"}])"), MockScriptError);
}

TEST(Mock, LoadFromFileRoundTrip) {
  const auto dir = testing_support::temp_dir("mock-file");
  const std::vector<FixtureEntry> entries = {{request_key(hello()), "reply", FinishReason::stop}};
  std::ofstream(dir / "script.json") << fixture_to_json(entries).dump(2);
  auto mock = load_mock_script(dir / "script.json");
  EXPECT_EQ(mock->complete(hello(), mock_config()).text, "reply");
  EXPECT_THROW(load_mock_script(dir / "missing.json"), MockScriptError);
}

TEST(Recording, CapturesExchangesForReplay) {
  auto inner = std::make_shared<FnBackend>([](const std::vector<ChatMessage>& m) {
    return ChatResponse{"echo " + m.back().parts[0].text(), FinishReason::stop, {}};
  });
  RecordingBackend recorder(inner);
  recorder.complete(hello(), mock_config());
  recorder.complete({ChatMessage::user("other")}, mock_config());
  MockBackend replay(recorder.entries());
  EXPECT_EQ(replay.complete(hello(), mock_config()).text, "echo hello");
  EXPECT_EQ(replay.complete({ChatMessage::user("other")}, mock_config()).text, "echo other");
}

TEST(Router, DispatchesByKindAndRejectsUnknown) {
  BackendRouter router;
  router.add(BackendConfig::Kind::scripted_mock, std::make_shared<FnBackend>([](const auto&) {
               return ChatResponse{"from mock", FinishReason::stop, {}};
             }));
  EXPECT_EQ(router.complete(hello(), mock_config()).text, "from mock");
  BackendConfig http;
  http.kind = BackendConfig::Kind::http_openai_compatible;
  http.endpoint = "http://127.0.0.1:1";
  EXPECT_THROW(router.complete(hello(), http), PreconditionError);
}

TEST(Transcript, CallLoggedRecordsStageAndRaisesOnErrorFinish) {
  auto backend = FnBackend::constant("fine");
  Transcript transcript;
  call_logged(backend, hello(), mock_config(), fast_policy(1), "planner", &transcript);
  ASSERT_EQ(transcript.size(), 1u);
  EXPECT_EQ(transcript[0].stage, "planner");
  EXPECT_EQ(transcript[0].request_key, request_key(hello()));
  EXPECT_EQ(transcript[0].response, "fine");
  const auto json = to_json(transcript[0]);
  for (const char* key : {"stage", "request_key", "response", "latency_ms"}) EXPECT_TRUE(json.contains(key)) << key;

  FnBackend failing([](const auto&) { return ChatResponse{"", FinishReason::error, {}}; });
  EXPECT_THROW(call_logged(failing, hello(), mock_config(), fast_policy(1), "meta", &transcript), BackendError);
}

TEST(Http, UnreachableEndpointIsANetworkError) {
  HttpBackend http;
  BackendConfig config;
  config.kind = BackendConfig::Kind::http_openai_compatible;
  config.endpoint = "http://127.0.0.1:9";
  CallOptions options{std::chrono::milliseconds(300)};
  EXPECT_THROW(http.complete(hello(), config, options), NetworkError);
}

class LocalServer : public ::testing::Test {
 protected:
  void SetUp() override {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    config_.kind = BackendConfig::Kind::http_openai_compatible;
    config_.endpoint = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    config_.model_name = "local-model";
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  BackendConfig config_;
};

TEST_F(LocalServer, PostsChatCompletionWithBearerKeyFromEnv) {
  std::string auth;
  nlohmann::json body;
  server_.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    auth = req.get_header_value("Authorization");
    body = nlohmann::json::parse(req.body);
    res.set_content(R"({"choices":[{"message":{"content":"pong"},"finish_reason":"stop"}]})", "application/json");
  });
  ::setenv("MOCOT_TEST_KEY", "secret-123", 1);
  config_.api_key_env_var = "MOCOT_TEST_KEY";
  HttpBackend http;
  const auto response = http.complete(hello(), config_);
  EXPECT_EQ(response.text, "pong");
  EXPECT_EQ(auth, "Bearer secret-123");
  EXPECT_EQ(body["model"], "local-model");
  EXPECT_EQ(body["messages"].size(), 2u);
}

TEST_F(LocalServer, MissingKeyVariableIsAPreconditionError) {
  config_.api_key_env_var = "MOCOT_TEST_KEY_THAT_IS_NOT_SET";
  ::unsetenv("MOCOT_TEST_KEY_THAT_IS_NOT_SET");
  HttpBackend http;
  EXPECT_THROW(http.complete(hello(), config_), PreconditionError);
}

TEST_F(LocalServer, ServerErrorsAreRetriedThenSucceed) {
  int hits = 0;
  server_.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    if (++hits == 1) {
      res.status = 500;
      res.set_content("boom", "text/plain");
      return;
    }
    res.set_content(R"({"choices":[{"message":{"content":"ok"},"finish_reason":"stop"}]})", "application/json");
  });
  HttpBackend http;
  Recorder sleeps;
  const auto outcome = complete_with_retry(http, hello(), config_, fast_policy(3), sleeps.fn());
  EXPECT_EQ(outcome.response.text, "ok");
  EXPECT_EQ(outcome.attempts, 2);
}

TEST_F(LocalServer, BadRequestStatusIsNotRetried) {
  int hits = 0;
  server_.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 400;
    res.set_content("nope", "text/plain");
  });
  HttpBackend http;
  Recorder sleeps;
  try {
    complete_with_retry(http, hello(), config_, fast_policy(3), sleeps.fn());
    FAIL() << "expected HttpStatusError";
  } catch (const HttpStatusError& e) {
    EXPECT_EQ(e.status(), 400);
  }
  EXPECT_EQ(hits, 1);
}
