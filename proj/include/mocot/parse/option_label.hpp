#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace mocot::parse {

/// A multiple-choice option label: one uppercase ASCII letter.
class OptionLabel {
 public:
  /// Throws ParseError(unmappable_label) unless `letter` is in [A-Z].
  explicit OptionLabel(char letter);

  char letter() const { return letter_; }
  std::string str() const { return std::string(1, letter_); }

  friend auto operator<=>(const OptionLabel&, const OptionLabel&) = default;

 private:
  char letter_;
};

/// "A".."D" style label list of the given length.
std::vector<OptionLabel> letter_labels(std::size_t count);

/// Accepts "B", "b", "(B)", "B.", "Option B", "Answer: B", "B) text", "[\"B\"]".
/// Throws ParseError(unmappable_label) or ParseError(label_not_in_options).
OptionLabel normalize_option_label(std::string_view raw, const std::vector<OptionLabel>& options);

}  // namespace mocot::parse
