#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace mocot::backend {

enum class Role { system, user, assistant };

std::string_view to_string(Role role);
Role role_from_string(std::string_view name);

struct ImageRef {
  enum class Source { file_path, base64_payload, url };

  Source source = Source::file_path;
  std::string value;
  std::string media_type;  // e.g. "image/png"; inferred from the extension when empty

  friend bool operator==(const ImageRef&, const ImageRef&) = default;
};

std::string_view to_string(ImageRef::Source source);
ImageRef::Source image_source_from_string(std::string_view name);

/// Checks the ImageRef invariants: the payload of a base64 source decodes and
/// the media type names an image. Throws PreconditionError otherwise.
void validate(const ImageRef& image);

class ContentPart {
 public:
  enum class Kind { text, image };

  static ContentPart text(std::string body);
  static ContentPart image(ImageRef ref);

  Kind kind() const { return kind_; }
  const std::string& text() const;
  const ImageRef& image() const;

  friend bool operator==(const ContentPart&, const ContentPart&) = default;

 private:
  Kind kind_ = Kind::text;
  std::string text_;
  ImageRef image_;
};

struct ChatMessage {
  Role role = Role::user;
  std::vector<ContentPart> parts;

  static ChatMessage system(std::string text);
  static ChatMessage user(std::string text);
  static ChatMessage user(std::string text, const ImageRef& image);

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// At least one part; system messages carry text only.
void validate(const ChatMessage& message);

struct TokenUsage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

enum class FinishReason { stop, length, error };

std::string_view to_string(FinishReason reason);
FinishReason finish_reason_from_string(std::string_view name);

struct ChatResponse {
  std::string text;
  FinishReason finish_reason = FinishReason::stop;
  std::optional<TokenUsage> usage;
};

struct BackendConfig {
  enum class Kind { http_openai_compatible, scripted_mock };

  Kind kind = Kind::scripted_mock;
  std::string endpoint;  // base url, "/chat/completions" is appended
  std::string model_name;
  double temperature = 0.0;
  int max_output_tokens = 1024;
  std::string api_key_env_var;
};

void validate(const BackendConfig& config);

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{500};
  double backoff_multiplier = 2.0;
  std::chrono::milliseconds request_timeout{60000};
};

void validate(const RetryPolicy& policy);

}  // namespace mocot::backend
