#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "mocot/backend/chat.hpp"

namespace mocot::backend {

struct CallOptions {
  std::chrono::milliseconds timeout{60000};
};

/// A chat-completion service. Implementations must be safe to call from
/// several threads at once.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;

  /// Validates the request, then forwards to the transport.
  ChatResponse complete(const std::vector<ChatMessage>& messages, const BackendConfig& config,
                        const CallOptions& options = {});

 protected:
  virtual ChatResponse do_complete(const std::vector<ChatMessage>& messages,
                                   const BackendConfig& config, const CallOptions& options) = 0;
};

/// Dispatches each call to the transport registered for config.kind.
class BackendRouter : public ChatBackend {
 public:
  void add(BackendConfig::Kind kind, std::shared_ptr<ChatBackend> transport);
  bool has(BackendConfig::Kind kind) const;

 protected:
  ChatResponse do_complete(const std::vector<ChatMessage>& messages, const BackendConfig& config,
                           const CallOptions& options) override;

 private:
  std::map<BackendConfig::Kind, std::shared_ptr<ChatBackend>> transports_;
};

struct RetryOutcome {
  ChatResponse response;
  int attempts = 0;
};

using SleepFn = std::function<void(std::chrono::milliseconds)>;

/// Delay slept before attempt `attempt` (2-based): base × multiplier^(attempt−2).
std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int attempt);

/// Retries transient BackendErrors up to policy.max_attempts. Anything else
/// propagates on the first failure.
RetryOutcome complete_with_retry(ChatBackend& backend, const std::vector<ChatMessage>& messages,
                                 const BackendConfig& config, const RetryPolicy& policy,
                                 const SleepFn& sleep = {});

}  // namespace mocot::backend
