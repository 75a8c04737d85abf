#pragma once

#include <stdexcept>
#include <string>

namespace sva {

// Base class for all pipeline errors. Subcommands map ValidationError to
// exit code 1 and IoError to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input content: malformed scripts, unknown labels, shape mismatches,
// degenerate statistics and the like.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Filesystem problems: missing paths, unreadable or unwritable files.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sva
