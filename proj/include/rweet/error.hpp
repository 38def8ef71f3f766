#pragma once

#include <stdexcept>
#include <string>

namespace rweet {

enum class ErrorKind {
  kUsage,       // bad arguments or configuration
  kIo,          // missing file, unreadable/unwritable path
  kValidation,  // malformed record, unknown label, bad dimensions
  kStaleCache,  // persisted artifact digest does not match the requested config
  kFormat,      // persisted artifact is corrupt or has an unexpected header
  kNumeric,     // training diverged
};

// Single exception type for the library; the kind maps onto CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

// Exit-code contract: 0 success, 1 usage, 2 I/O, 3 validation, 4 stale cache.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return 1;
    case ErrorKind::kIo:
      return 2;
    case ErrorKind::kStaleCache:
      return 4;
    case ErrorKind::kValidation:
    case ErrorKind::kFormat:
    case ErrorKind::kNumeric:
      return 3;
  }
  return 3;
}

}  // namespace rweet
