#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sirec {

/// Error categories carried by every exception thrown from the engine.
/// They map one-to-one onto the status codes of the public C API.
enum class ErrCode {
  invalid_argument,  ///< bad shape, bad value, malformed config
  io,                ///< file missing, short read, bad magic
  numeric,           ///< non-finite values, factorization failure
  internal,          ///< broken invariant inside the engine
};

class Error : public std::runtime_error {
 public:
  Error(ErrCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  ErrCode code() const noexcept { return code_; }

 private:
  ErrCode code_;
};

[[noreturn]] inline void fail(ErrCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool ok, ErrCode code, const std::string& message) {
  if (!ok) fail(code, message);
}

}  // namespace sirec
