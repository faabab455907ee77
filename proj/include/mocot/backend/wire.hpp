#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mocot/backend/chat.hpp"

namespace mocot::backend {

/// OpenAI-compatible "messages" array. File-path images are read and sent as
/// base64 data URLs.
nlohmann::json encode_messages(const std::vector<ChatMessage>& messages);

/// Inverse of encode_messages. Data URLs come back as base64 payloads.
std::vector<ChatMessage> decode_messages(const nlohmann::json& wire);

/// Full chat-completions request body.
nlohmann::json encode_request(const std::vector<ChatMessage>& messages, const BackendConfig& config);

/// First choice of a chat-completions reply. Throws MalformedResponseError.
ChatResponse decode_response(const nlohmann::json& body);

/// Roles and text verbatim. Image parts become "sha256:<hex>" of the file
/// bytes for readable file images and the source value otherwise.
std::string canonical_form(const std::vector<ChatMessage>& messages);

/// Hex SHA-256 of canonical_form; the key used by mock fixtures.
std::string request_key(const std::vector<ChatMessage>& messages);

}  // namespace mocot::backend
