#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mocot/backend/backend.hpp"

namespace mocot::backend {

struct FixtureEntry {
  std::string key;
  std::string response;
  FinishReason finish_reason = FinishReason::stop;
};

/// Replays fixture responses keyed by request_key(messages). Entries sharing
/// a key are served in file order; the last one repeats once they run out.
class MockBackend : public ChatBackend {
 public:
  explicit MockBackend(std::vector<FixtureEntry> entries);

  std::size_t size() const { return entries_.size(); }
  /// Number of times `key` has been served.
  int hits(const std::string& key) const;
  std::vector<std::string> unused_keys() const;

 protected:
  ChatResponse do_complete(const std::vector<ChatMessage>& messages, const BackendConfig& config,
                           const CallOptions& options) override;

 private:
  std::map<std::string, std::vector<FixtureEntry>> entries_;
  mutable std::mutex mutex_;
  std::map<std::string, int> hits_;
};

/// Parses the fixture format: JSON array of {key, response, finish_reason}.
std::vector<FixtureEntry> parse_mock_script(const std::string& text);
std::shared_ptr<MockBackend> load_mock_script(const std::filesystem::path& path);

nlohmann::json fixture_to_json(const std::vector<FixtureEntry>& entries);

/// Passes calls through to `inner` and keeps every exchange as a fixture entry.
class RecordingBackend : public ChatBackend {
 public:
  explicit RecordingBackend(std::shared_ptr<ChatBackend> inner);

  /// Entries sorted by key; repeated keys are stored once.
  std::vector<FixtureEntry> entries() const;
  void write(const std::filesystem::path& path) const;

 protected:
  ChatResponse do_complete(const std::vector<ChatMessage>& messages, const BackendConfig& config,
                           const CallOptions& options) override;

 private:
  std::shared_ptr<ChatBackend> inner_;
  mutable std::mutex mutex_;
  std::map<std::string, FixtureEntry> recorded_;
};

}  // namespace mocot::backend
