#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace mocot::backend {

std::string sha256_hex(std::string_view data);

std::string base64_encode(std::string_view bytes);

/// nullopt when the input is not canonical base64.
std::optional<std::string> base64_decode(std::string_view text);

}  // namespace mocot::backend
