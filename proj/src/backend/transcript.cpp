#include "mocot/backend/transcript.hpp"

#include <chrono>

#include "mocot/backend/errors.hpp"
#include "mocot/backend/wire.hpp"

namespace mocot::backend {

nlohmann::json to_json(const TranscriptEntry& entry) {
  return {{"stage", entry.stage},
          {"request_key", entry.request_key},
          {"response", entry.response},
          {"latency_ms", entry.latency_ms}};
}

ChatResponse call_logged(ChatBackend& backend, const std::vector<ChatMessage>& messages, const BackendConfig& config,
                         const RetryPolicy& policy, std::string_view stage, Transcript* sink) {
  const auto started = std::chrono::steady_clock::now();
  auto outcome = complete_with_retry(backend, messages, config, policy);
  const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - started;
  if (sink != nullptr) {
    sink->push_back({std::string(stage), request_key(messages), outcome.response.text, elapsed.count()});
  }
  if (outcome.response.finish_reason == FinishReason::error) {
    throw BackendError(std::string(stage) + " call finished with an error");
  }
  return std::move(outcome.response);
}

}  // namespace mocot::backend
