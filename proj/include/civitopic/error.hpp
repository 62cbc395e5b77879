#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace civitopic {

enum class ErrorCode {
  parameter,
  schema,
  io,
  format,
  data,
  configuration,
  transport,
  protocol,
  evaluation,
  empty_topic,
  undefined_similarity,
  internal,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the engine carries one of the codes above so the
/// C API can map it onto a stable status value.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace civitopic
