#pragma once

#include <stdexcept>
#include <string>

namespace kawalab {

// Violation of an internal invariant: the caller cannot fix it by changing
// inputs.  The CLI maps this to its own exit code, distinct from input
// validation failures (std::invalid_argument).
class internal_error : public std::runtime_error {
 public:
  explicit internal_error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline void check_internal(bool cond, const std::string& msg) {
  if (!cond) throw internal_error(msg);
}

}  // namespace kawalab
