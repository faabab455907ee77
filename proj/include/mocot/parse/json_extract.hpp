#pragma once

#include <string_view>

#include <nlohmann/json.hpp>

namespace mocot::parse {

enum class ExtractStrategy { fenced_block, balanced_span };

struct ExtractedJson {
  nlohmann::json value;
  ExtractStrategy strategy = ExtractStrategy::fenced_block;
};

/// First ```json (or bare ```) block; without a usable fence, the largest
/// balanced {...} span that parses. The result is always a JSON object.
ExtractedJson extract_fenced_json(std::string_view text);

}  // namespace mocot::parse
