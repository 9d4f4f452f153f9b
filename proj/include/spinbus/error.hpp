#pragma once

#include <stdexcept>
#include <string>

namespace spinbus {

/// Error categories map onto the CLI exit codes: config -> 2,
/// numerical -> 3, io -> 4.
enum class ErrorKind { config, numerical, io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

  int exit_code() const {
    switch (kind_) {
      case ErrorKind::config: return 2;
      case ErrorKind::numerical: return 3;
      case ErrorKind::io: return 4;
    }
    return 1;
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_config(const std::string& msg) {
  throw Error(ErrorKind::config, msg);
}
[[noreturn]] inline void throw_numerical(const std::string& msg) {
  throw Error(ErrorKind::numerical, msg);
}
[[noreturn]] inline void throw_io(const std::string& msg) {
  throw Error(ErrorKind::io, msg);
}

}  // namespace spinbus
