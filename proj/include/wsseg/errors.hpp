#ifndef WSSEG_ERRORS_HPP
#define WSSEG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wsseg {

// Base for every data-level failure the library reports (bad inputs, bad
// files). Programmer errors on preconditions use std::invalid_argument.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed file content. `position` is a byte offset for binary payloads
// and a 1-based line number for text headers; `unit` says which.
class FormatError : public Error {
 public:
  FormatError(const std::string& path, const std::string& what,
              std::size_t position, const char* unit)
      : Error(path + ": " + what + " (at " + unit + " " +
              std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace wsseg

#endif  // WSSEG_ERRORS_HPP
