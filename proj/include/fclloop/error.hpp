#pragma once

#include <stdexcept>
#include <string>

namespace fclloop {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownSet : public Error {
 public:
  explicit UnknownSet(const std::string& name) : Error("unknown set '" + name + "'"), name_(name) {}
  [[nodiscard]] const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class UnknownAttribute : public Error {
 public:
  explicit UnknownAttribute(const std::string& attr)
      : Error("unknown attribute '" + attr + "'"), attr_(attr) {}
  [[nodiscard]] const std::string& attribute() const { return attr_; }

 private:
  std::string attr_;
};

class StepOutOfRange : public Error {
 public:
  StepOutOfRange(long step, std::size_t length)
      : Error("step " + std::to_string(step) + " outside trace of length " + std::to_string(length)) {}
};

class InfiniteTraceUnsupported : public Error {
 public:
  InfiniteTraceUnsupported() : Error("INF counter cannot be evaluated on a finite trace") {}
};

class NegativeWindow : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class EmptyTrace : public Error {
 public:
  EmptyTrace() : Error("trace has no steps") {}
};

class TraceFormatError : public Error {
 public:
  using Error::Error;
};

class SpawnFailed : public Error {
 public:
  using Error::Error;
};

class MissingSection : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class GeneratorUnavailable : public Error {
 public:
  using Error::Error;
};

}  // namespace fclloop
