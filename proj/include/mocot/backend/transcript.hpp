#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mocot/backend/backend.hpp"

namespace mocot::backend {

/// One backend call as persisted in transcripts.jsonl.
struct TranscriptEntry {
  std::string stage;
  std::string request_key;
  std::string response;
  double latency_ms = 0.0;
};

nlohmann::json to_json(const TranscriptEntry& entry);

using Transcript = std::vector<TranscriptEntry>;

/// complete_with_retry plus a transcript entry tagged with `stage`. A reply
/// with finish_reason=error is raised as a BackendError.
ChatResponse call_logged(ChatBackend& backend, const std::vector<ChatMessage>& messages, const BackendConfig& config,
                         const RetryPolicy& policy, std::string_view stage, Transcript* sink);

}  // namespace mocot::backend
