#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace semshift {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data (embedding files, config files, CSV tables).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures: unreadable inputs, unwritable outputs.
class IoError : public Error {
 public:
  using Error::Error;
};

// A caller-supplied argument violates an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Non-fatal diagnostics (saturated anchor sets, rank-deficient fits, ...).
// The default handler prints "warning: <msg>" to stderr.
using WarningHandler = std::function<void(std::string_view)>;

// Installs a new handler and returns the previous one. Passing an empty
// function restores the default stderr handler.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(std::string_view message);

}  // namespace semshift
