#pragma once

#include <stdexcept>
#include <string>

namespace stefan {

/// Invalid input: bad configuration value, out-of-domain argument,
/// malformed file.  The CLI maps this to exit code 2.
struct input_error : std::runtime_error {
  explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numeric failure: iteration did not converge, detected instability,
/// non-finite value.  The CLI maps this to exit code 3.
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

inline void require_input(bool cond, const std::string& what) {
  if (!cond) throw input_error(what);
}

inline void require_numeric(bool cond, const std::string& what) {
  if (!cond) throw numeric_error(what);
}

} // namespace stefan
