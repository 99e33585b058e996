#pragma once

#include <stdexcept>
#include <string>

namespace clfsec {

// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent user configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Unreadable or malformed input file. Carries the offending path.
class InputError : public Error {
 public:
  InputError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace clfsec
