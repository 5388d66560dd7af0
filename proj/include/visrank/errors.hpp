#pragma once

#include <stdexcept>

namespace visrank {

// Input that could not be decoded at all (broken JSON, truncated line).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Decoded input whose values violate a documented contract (score out of
// range, empty token, duplicate id).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Model or table file with a bad magic string, version, or structure.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace visrank
