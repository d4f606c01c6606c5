#pragma once

#include <stdexcept>
#include <string>

namespace wfair {

// Every failure surfaced by the library is a wfair::Error; messages are stable
// strings that tests and the CLI match on.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

}  // namespace wfair
