#include "mocot/backend/http_backend.hpp"

#include <cstdlib>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "mocot/backend/errors.hpp"
#include "mocot/backend/wire.hpp"

namespace mocot::backend {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing slash
};

SplitUrl split_endpoint(const std::string& endpoint) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) throw PreconditionError("endpoint must include a scheme: " + endpoint);
  const auto path_start = endpoint.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = endpoint.substr(0, path_start);
  out.path = path_start == std::string::npos ? "" : endpoint.substr(path_start);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

}  // namespace

ChatResponse HttpBackend::do_complete(const std::vector<ChatMessage>& messages, const BackendConfig& config,
                                      const CallOptions& options) {
  const auto url = split_endpoint(config.endpoint);
  const std::string body = encode_request(messages, config).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);

  httplib::Headers headers;
  if (!config.api_key_env_var.empty()) {
    const char* key = std::getenv(config.api_key_env_var.c_str());
    if (key == nullptr || *key == '\0') {
      throw PreconditionError("environment variable " + config.api_key_env_var + " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  httplib::Client client(url.origin);
  client.set_connection_timeout(options.timeout);
  client.set_read_timeout(options.timeout);
  client.set_write_timeout(options.timeout);

  auto result = client.Post(url.path + "/chat/completions", headers, body, "application/json");
  if (!result) {
    throw NetworkError("request to " + config.endpoint + " failed: " + httplib::to_string(result.error()));
  }
  if (result->status < 200 || result->status >= 300) throw HttpStatusError(result->status, result->body);

  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(result->body);
  } catch (const nlohmann::json::parse_error&) {
    throw MalformedResponseError("response body is not JSON");
  }
  return decode_response(reply);
}

}  // namespace mocot::backend
