#include "mocot/backend/chat.hpp"

#include <algorithm>

#include "mocot/backend/encoding.hpp"
#include "mocot/backend/errors.hpp"

namespace mocot::backend {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::system:
      return "system";
    case Role::user:
      return "user";
    case Role::assistant:
      return "assistant";
  }
  return "user";
}

Role role_from_string(std::string_view name) {
  if (name == "system") return Role::system;
  if (name == "user") return Role::user;
  if (name == "assistant") return Role::assistant;
  throw PreconditionError("unknown role: " + std::string(name));
}

std::string_view to_string(ImageRef::Source source) {
  switch (source) {
    case ImageRef::Source::file_path:
      return "file-path";
    case ImageRef::Source::base64_payload:
      return "base64-payload";
    case ImageRef::Source::url:
      return "url";
  }
  return "file-path";
}

ImageRef::Source image_source_from_string(std::string_view name) {
  if (name == "file-path") return ImageRef::Source::file_path;
  if (name == "base64-payload") return ImageRef::Source::base64_payload;
  if (name == "url") return ImageRef::Source::url;
  throw PreconditionError("unknown image source: " + std::string(name));
}

void validate(const ImageRef& image) {
  if (image.value.empty()) throw PreconditionError("image reference has an empty value");
  if (!image.media_type.empty() && image.media_type.rfind("image/", 0) != 0) {
    throw PreconditionError("media type is not an image type: " + image.media_type);
  }
  if (image.source == ImageRef::Source::base64_payload) {
    if (image.media_type.empty()) throw PreconditionError("base64 image needs a media type");
    if (!base64_decode(image.value)) throw PreconditionError("image payload is not valid base64");
  }
}

ContentPart ContentPart::text(std::string body) {
  ContentPart part;
  part.kind_ = Kind::text;
  part.text_ = std::move(body);
  return part;
}

ContentPart ContentPart::image(ImageRef ref) {
  ContentPart part;
  part.kind_ = Kind::image;
  part.image_ = std::move(ref);
  return part;
}

const std::string& ContentPart::text() const {
  if (kind_ != Kind::text) throw PreconditionError("content part is not text");
  return text_;
}

const ImageRef& ContentPart::image() const {
  if (kind_ != Kind::image) throw PreconditionError("content part is not an image");
  return image_;
}

ChatMessage ChatMessage::system(std::string text) {
  return {Role::system, {ContentPart::text(std::move(text))}};
}

ChatMessage ChatMessage::user(std::string text) {
  return {Role::user, {ContentPart::text(std::move(text))}};
}

ChatMessage ChatMessage::user(std::string text, const ImageRef& image) {
  return {Role::user, {ContentPart::image(image), ContentPart::text(std::move(text))}};
}

void validate(const ChatMessage& message) {
  if (message.parts.empty()) throw PreconditionError("chat message has no parts");
  for (const auto& part : message.parts) {
    if (part.kind() == ContentPart::Kind::image) {
      if (message.role == Role::system) throw PreconditionError("system messages carry text only");
      validate(part.image());
    }
  }
}

std::string_view to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::stop:
      return "stop";
    case FinishReason::length:
      return "length";
    case FinishReason::error:
      return "error";
  }
  return "error";
}

FinishReason finish_reason_from_string(std::string_view name) {
  if (name == "stop") return FinishReason::stop;
  if (name == "length") return FinishReason::length;
  if (name == "error") return FinishReason::error;
  throw PreconditionError("unknown finish reason: " + std::string(name));
}

void validate(const BackendConfig& config) {
  if (config.temperature < 0.0) throw PreconditionError("temperature must be non-negative");
  if (config.max_output_tokens < 1) throw PreconditionError("max output tokens must be at least 1");
  if (config.kind == BackendConfig::Kind::http_openai_compatible && config.endpoint.empty()) {
    throw PreconditionError("http backend needs an endpoint");
  }
}

void validate(const RetryPolicy& policy) {
  if (policy.max_attempts < 1) throw PreconditionError("max attempts must be at least 1");
  if (policy.backoff_multiplier < 1.0) throw PreconditionError("backoff multiplier must be >= 1");
  if (policy.base_delay.count() < 0) throw PreconditionError("base delay must be non-negative");
}

}  // namespace mocot::backend
