#pragma once

#include <string>
#include <string_view>

namespace mocot::parse {

struct TaggedOutput {
  std::string reasoning;
  std::string answer;  // raw, before label normalization

  friend bool operator==(const TaggedOutput&, const TaggedOutput&) = default;
};

enum class TagMode { strict, lenient };

/// Pulls the <REASONING> and <ANSWER> bodies out of a model output. Tag names
/// match case-insensitively and the first occurrence wins. Strict mode also
/// requires the document to be exactly the two spans, in that order, with
/// only whitespace around them and no nested or repeated tags.
TaggedOutput parse_tagged_output(std::string_view text, TagMode mode);

std::string render_tagged_output(const TaggedOutput& output);

}  // namespace mocot::parse
