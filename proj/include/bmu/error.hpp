#pragma once

#include <stdexcept>
#include <string>

namespace bmu {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An operation was invoked in a state its contract forbids.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain (non-finite values, gamma not in (0,1), ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// A fixed-size neuron pool ran out of free neurons.
class CapacityError : public Error {
 public:
  CapacityError(const std::string& what, std::size_t capacity)
      : Error(what), capacity_(capacity) {}
  std::size_t capacity() const noexcept { return capacity_; }

 private:
  std::size_t capacity_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace bmu
