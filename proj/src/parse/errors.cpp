#include "mocot/parse/errors.hpp"

namespace mocot::parse {

ParseError::ParseError(Kind kind, const std::string& message, std::string raw)
    : std::runtime_error(message), kind_(kind), raw_(std::move(raw)) {}

}  // namespace mocot::parse
