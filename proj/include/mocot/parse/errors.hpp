#pragma once

#include <stdexcept>
#include <string>

namespace mocot::parse {

class ParseError : public std::runtime_error {
 public:
  enum class Kind {
    no_parseable_block,
    not_an_object,
    missing_tag,
    duplicate_tag,
    not_strict,
    missing_field,
    ill_typed_field,
    arity,
    unmappable_label,
    label_not_in_options,
    missing_line,
  };

  ParseError(Kind kind, const std::string& message, std::string raw = {});

  Kind kind() const { return kind_; }
  /// The model output that failed to parse, when available.
  const std::string& raw() const { return raw_; }

 private:
  Kind kind_;
  std::string raw_;
};

}  // namespace mocot::parse
