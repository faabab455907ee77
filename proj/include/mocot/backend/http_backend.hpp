#pragma once

#include "mocot/backend/backend.hpp"

namespace mocot::backend {

/// POST {endpoint}/chat/completions with bearer auth taken from the
/// environment variable named in the config.
class HttpBackend : public ChatBackend {
 protected:
  ChatResponse do_complete(const std::vector<ChatMessage>& messages, const BackendConfig& config,
                           const CallOptions& options) override;
};

}  // namespace mocot::backend
