#pragma once

#include <stdexcept>
#include <string>

namespace gcb {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CycleDetected : public Error {
 public:
  using Error::Error;
};

class ArityMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidIntervention : public Error {
 public:
  using Error::Error;
};

class NormConstraintViolated : public Error {
 public:
  using Error::Error;
};

class AnalyticUnsupported : public Error {
 public:
  using Error::Error;
};

class GridTooLarge : public Error {
 public:
  using Error::Error;
};

class UnsupportedClass : public Error {
 public:
  using Error::Error;
};

class NonFiniteLoss : public Error {
 public:
  using Error::Error;
};

class InvalidDelta : public Error {
 public:
  using Error::Error;
};

class InvalidSlopes : public Error {
 public:
  using Error::Error;
};

class DeltaMismatch : public Error {
 public:
  using Error::Error;
};

/// Configuration problem; the message starts with the offending field path.
class ConfigInvalid : public Error {
 public:
  ConfigInvalid(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gcb
