#pragma once

#include <stdexcept>
#include <string>

namespace modabric {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape or extent disagreement between operands.
struct DimensionError : Error {
  using Error::Error;
};

// Id or index outside a table's valid range.
struct IndexError : Error {
  using Error::Error;
};

// Non-finite values, or arguments outside an operation's documented domain.
struct ValueError : Error {
  using Error::Error;
};

// Malformed input file; the message carries the location.
struct ParseError : Error {
  using Error::Error;
};

// Unknown or invalid configuration key/value.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace modabric
