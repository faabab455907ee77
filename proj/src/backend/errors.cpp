#include "mocot/backend/errors.hpp"

namespace mocot::backend {

HttpStatusError::HttpStatusError(int status, const std::string& body)
    : BackendError("HTTP " + std::to_string(status) + ": " + body.substr(0, 512)),
      status_(status),
      body_(body) {}

MockMissError::MockMissError(const std::string& key)
    : BackendError("mock script has no response for request key " + key), key_(key) {}

MockScriptError::MockScriptError(const std::string& message, int line)
    : std::runtime_error(line > 0 ? "mock script line " + std::to_string(line) + ": " + message
                                  : "mock script: " + message),
      line_(line) {}

RetriesExhaustedError::RetriesExhaustedError(int attempts, const std::string& last_error)
    : BackendError("gave up after " + std::to_string(attempts) + " attempts: " + last_error),
      attempts_(attempts),
      last_error_(last_error) {}

}  // namespace mocot::backend
