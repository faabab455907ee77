#include "mocot/backend/wire.hpp"

#include <fstream>
#include <sstream>

#include "mocot/backend/encoding.hpp"
#include "mocot/backend/errors.hpp"

namespace mocot::backend {

using json = nlohmann::json;

namespace {

std::string media_type_for(const std::string& path) {
  const auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == "jpg" || ext == "jpeg") return "image/jpeg";
  if (ext == "gif") return "image/gif";
  if (ext == "webp") return "image/webp";
  return "image/png";
}

std::string image_url(const ImageRef& image) {
  switch (image.source) {
    case ImageRef::Source::url:
      return image.value;
    case ImageRef::Source::base64_payload:
      return "data:" + image.media_type + ";base64," + image.value;
    case ImageRef::Source::file_path: {
      std::ifstream in(image.value, std::ios::binary);
      if (!in) throw PreconditionError("cannot read image file: " + image.value);
      std::ostringstream bytes;
      bytes << in.rdbuf();
      const std::string type = image.media_type.empty() ? media_type_for(image.value) : image.media_type;
      return "data:" + type + ";base64," + base64_encode(bytes.str());
    }
  }
  return image.value;
}

ImageRef image_from_url(const std::string& url) {
  static constexpr std::string_view kData = "data:";
  static constexpr std::string_view kMarker = ";base64,";
  if (url.rfind(kData, 0) == 0) {
    const auto marker = url.find(kMarker);
    if (marker == std::string::npos) throw PreconditionError("data URL is not base64: " + url.substr(0, 64));
    return {ImageRef::Source::base64_payload, url.substr(marker + kMarker.size()),
            url.substr(kData.size(), marker - kData.size())};
  }
  return {ImageRef::Source::url, url, ""};
}

// File images are keyed by content so fixtures survive moving the data.
std::string image_key(const ImageRef& image) {
  if (image.source != ImageRef::Source::file_path) return image.value;
  std::ifstream in(image.value, std::ios::binary);
  if (!in) return image.value;
  std::ostringstream bytes;
  bytes << in.rdbuf();
  return "sha256:" + sha256_hex(bytes.str());
}

}  // namespace

json encode_messages(const std::vector<ChatMessage>& messages) {
  json out = json::array();
  for (const auto& message : messages) {
    validate(message);
    json entry;
    entry["role"] = to_string(message.role);
    if (message.parts.size() == 1 && message.parts.front().kind() == ContentPart::Kind::text) {
      entry["content"] = message.parts.front().text();
    } else {
      json content = json::array();
      for (const auto& part : message.parts) {
        if (part.kind() == ContentPart::Kind::text) {
          content.push_back({{"type", "text"}, {"text", part.text()}});
        } else {
          content.push_back({{"type", "image_url"}, {"image_url", {{"url", image_url(part.image())}}}});
        }
      }
      entry["content"] = std::move(content);
    }
    out.push_back(std::move(entry));
  }
  return out;
}

std::vector<ChatMessage> decode_messages(const json& wire) {
  if (!wire.is_array()) throw PreconditionError("messages must be a JSON array");
  std::vector<ChatMessage> out;
  for (const auto& entry : wire) {
    ChatMessage message;
    message.role = role_from_string(entry.at("role").get<std::string>());
    const auto& content = entry.at("content");
    if (content.is_string()) {
      message.parts.push_back(ContentPart::text(content.get<std::string>()));
    } else {
      for (const auto& part : content) {
        const auto type = part.at("type").get<std::string>();
        if (type == "text") {
          message.parts.push_back(ContentPart::text(part.at("text").get<std::string>()));
        } else if (type == "image_url") {
          message.parts.push_back(ContentPart::image(image_from_url(part.at("image_url").at("url").get<std::string>())));
        } else {
          throw PreconditionError("unsupported content part type: " + type);
        }
      }
    }
    out.push_back(std::move(message));
  }
  return out;
}

json encode_request(const std::vector<ChatMessage>& messages, const BackendConfig& config) {
  return {{"model", config.model_name},
          {"messages", encode_messages(messages)},
          {"temperature", config.temperature},
          {"max_tokens", config.max_output_tokens}};
}

ChatResponse decode_response(const json& body) {
  if (!body.is_object() || !body.contains("choices") || !body["choices"].is_array() ||
      body["choices"].empty()) {
    throw MalformedResponseError("response has no choices");
  }
  const auto& choice = body["choices"][0];
  if (!choice.contains("message") || !choice["message"].is_object()) {
    throw MalformedResponseError("first choice has no message");
  }
  const auto& content = choice["message"].value("content", json());
  ChatResponse response;
  if (content.is_string()) {
    response.text = content.get<std::string>();
  } else if (content.is_array()) {
    for (const auto& part : content) {
      if (part.is_object() && part.value("type", "") == "text") response.text += part.value("text", "");
    }
  } else if (!content.is_null()) {
    throw MalformedResponseError("message content has an unexpected type");
  }
  const auto reason = choice.value("finish_reason", json());
  if (reason.is_string() && reason.get<std::string>() == "length") {
    response.finish_reason = FinishReason::length;
  } else if (reason.is_string() && reason.get<std::string>() != "stop") {
    response.finish_reason = FinishReason::error;
  } else {
    response.finish_reason = FinishReason::stop;
  }
  if (response.finish_reason == FinishReason::stop && response.text.empty()) {
    throw MalformedResponseError("empty completion text");
  }
  if (body.contains("usage") && body["usage"].is_object()) {
    TokenUsage usage;
    usage.prompt_tokens = body["usage"].value("prompt_tokens", 0);
    usage.completion_tokens = body["usage"].value("completion_tokens", 0);
    response.usage = usage;
  }
  return response;
}

std::string canonical_form(const std::vector<ChatMessage>& messages) {
  json out = json::array();
  for (const auto& message : messages) {
    json parts = json::array();
    for (const auto& part : message.parts) {
      if (part.kind() == ContentPart::Kind::text) {
        parts.push_back({{"text", part.text()}});
      } else {
        parts.push_back({{"image", image_key(part.image())}});
      }
    }
    out.push_back({{"role", to_string(message.role)}, {"parts", std::move(parts)}});
  }
  return out.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string request_key(const std::vector<ChatMessage>& messages) {
  return sha256_hex(canonical_form(messages));
}

}  // namespace mocot::backend
