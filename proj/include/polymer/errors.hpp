#pragma once

#include <stdexcept>
#include <string>

namespace polymer {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parallelogram whose spine is parallel to its anti-diagonal side (start == end).
class DegenerateRegion : public Error {
 public:
  using Error::Error;
};

/// No target member dominates any source member, or the path set is unbounded.
class InfeasibleQuery : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class NonpositiveData : public Error {
 public:
  using Error::Error;
};

/// Configuration rejected; the message starts with the offending field path.
class ConfigInvalid : public Error {
 public:
  ConfigInvalid(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class ManifestMismatch : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace polymer
