#include "mocot/backend/backend.hpp"

#include <cmath>
#include <thread>

#include "mocot/backend/errors.hpp"

namespace mocot::backend {

ChatResponse ChatBackend::complete(const std::vector<ChatMessage>& messages, const BackendConfig& config,
                                   const CallOptions& options) {
  if (messages.empty()) throw PreconditionError("complete() needs at least one message");
  for (const auto& message : messages) validate(message);
  validate(config);
  return do_complete(messages, config, options);
}

void BackendRouter::add(BackendConfig::Kind kind, std::shared_ptr<ChatBackend> transport) {
  transports_[kind] = std::move(transport);
}

bool BackendRouter::has(BackendConfig::Kind kind) const { return transports_.count(kind) != 0; }

ChatResponse BackendRouter::do_complete(const std::vector<ChatMessage>& messages, const BackendConfig& config,
                                        const CallOptions& options) {
  const auto it = transports_.find(config.kind);
  if (it == transports_.end()) {
    throw PreconditionError(config.kind == BackendConfig::Kind::scripted_mock
                                ? "scripted-mock backend requested but no mock script was loaded"
                                : "no transport registered for http backends");
  }
  return it->second->complete(messages, config, options);
}

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int attempt) {
  if (attempt <= 1) return std::chrono::milliseconds{0};
  const double factor = std::pow(policy.backoff_multiplier, attempt - 2);
  return std::chrono::milliseconds{static_cast<long long>(static_cast<double>(policy.base_delay.count()) * factor)};
}

RetryOutcome complete_with_retry(ChatBackend& backend, const std::vector<ChatMessage>& messages,
                                 const BackendConfig& config, const RetryPolicy& policy, const SleepFn& sleep) {
  validate(policy);
  const CallOptions options{policy.request_timeout};
  std::string last_error;
  for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
    if (attempt > 1) {
      const auto delay = backoff_delay(policy, attempt);
      if (sleep) {
        sleep(delay);
      } else {
        std::this_thread::sleep_for(delay);
      }
    }
    try {
      return {backend.complete(messages, config, options), attempt};
    } catch (const BackendError& error) {
      if (!error.transient()) throw;
      last_error = error.what();
    }
  }
  throw RetriesExhaustedError(policy.max_attempts, last_error);
}

}  // namespace mocot::backend
