#include "mocot/backend/mock_backend.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "mocot/backend/errors.hpp"
#include "mocot/backend/wire.hpp"

namespace mocot::backend {

using json = nlohmann::json;

namespace {

int line_of(const std::string& text, std::size_t byte_offset) {
  byte_offset = std::min(byte_offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte_offset), '\n'));
}

bool is_hex_key(const std::string& key) {
  return !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
  });
}

}  // namespace

std::vector<FixtureEntry> parse_mock_script(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& error) {
    // byte is 1-based and points one past the offending character
    const std::size_t offset = error.byte == 0 ? 0 : error.byte - 1;
    throw MockScriptError(error.what(), line_of(text, offset));
  }
  if (!doc.is_array()) throw MockScriptError("top level must be a JSON array", 1);

  std::vector<FixtureEntry> entries;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    const std::string where = "entry " + std::to_string(i);
    if (!item.is_object() || !item.contains("key") || !item["key"].is_string() || !item.contains("response") ||
        !item["response"].is_string()) {
      throw MockScriptError(where + " needs string fields 'key' and 'response'", 0);
    }
    FixtureEntry entry;
    entry.key = item["key"].get<std::string>();
    if (!is_hex_key(entry.key)) throw MockScriptError(where + " key is not a hex string", 0);
    std::transform(entry.key.begin(), entry.key.end(), entry.key.begin(),
                   [](char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); });
    entry.response = item["response"].get<std::string>();
    try {
      entry.finish_reason = finish_reason_from_string(item.value("finish_reason", "stop"));
    } catch (const PreconditionError& error) {
      throw MockScriptError(where + ": " + error.what(), 0);
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::shared_ptr<MockBackend> load_mock_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MockScriptError("cannot open " + path.string(), 0);
  std::ostringstream text;
  text << in.rdbuf();
  return std::make_shared<MockBackend>(parse_mock_script(text.str()));
}

json fixture_to_json(const std::vector<FixtureEntry>& entries) {
  json out = json::array();
  for (const auto& entry : entries) {
    out.push_back({{"key", entry.key}, {"response", entry.response}, {"finish_reason", to_string(entry.finish_reason)}});
  }
  return out;
}

MockBackend::MockBackend(std::vector<FixtureEntry> entries) {
  for (auto& entry : entries) {
    auto key = entry.key;
    entries_[std::move(key)].push_back(std::move(entry));
  }
}

int MockBackend::hits(const std::string& key) const {
  std::lock_guard lock(mutex_);
  const auto it = hits_.find(key);
  return it == hits_.end() ? 0 : it->second;
}

std::vector<std::string> MockBackend::unused_keys() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [key, entry] : entries_) {
    if (hits_.count(key) == 0) out.push_back(key);
  }
  return out;
}

ChatResponse MockBackend::do_complete(const std::vector<ChatMessage>& messages, const BackendConfig&,
                                      const CallOptions&) {
  const auto key = request_key(messages);
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw MockMissError(key);
  std::lock_guard lock(mutex_);
  const auto served = static_cast<std::size_t>(hits_[key]++);
  const auto& entry = it->second[std::min(served, it->second.size() - 1)];
  return {entry.response, entry.finish_reason, std::nullopt};
}

RecordingBackend::RecordingBackend(std::shared_ptr<ChatBackend> inner) : inner_(std::move(inner)) {}

std::vector<FixtureEntry> RecordingBackend::entries() const {
  std::lock_guard lock(mutex_);
  std::vector<FixtureEntry> out;
  for (const auto& [key, entry] : recorded_) out.push_back(entry);
  return out;
}

void RecordingBackend::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write fixture file " + path.string());
  out << fixture_to_json(entries()).dump(2) << '\n';
}

ChatResponse RecordingBackend::do_complete(const std::vector<ChatMessage>& messages, const BackendConfig& config,
                                           const CallOptions& options) {
  auto response = inner_->complete(messages, config, options);
  const auto key = request_key(messages);
  std::lock_guard lock(mutex_);
  recorded_.emplace(key, FixtureEntry{key, response.text, response.finish_reason});
  return response;
}

}  // namespace mocot::backend
