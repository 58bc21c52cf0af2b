#pragma once

#include <stdexcept>
#include <string>

namespace dlo {

// Failure categories. The CLI maps each to a distinct exit code.
enum class ErrorCode {
  invalid_argument = 1,
  bad_image = 2,
  insufficient_seeds = 3,
  no_walk_closed = 4,
  invalid_config = 5,
  invalid_seed = 6,
  io = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::invalid_argument, what);
}

}  // namespace dlo
