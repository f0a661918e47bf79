#pragma once

#include <stdexcept>
#include <string>

namespace epsim {

// Base for all precondition and domain failures raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated an operation's precondition (bad range, mode mismatch...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A matrix handed to the engine is not unitary within tolerance.
class NotUnitary : public Error {
 public:
  using Error::Error;
};

// A component failed to compile; carries the index within its circuit.
class ComponentError : public Error {
 public:
  ComponentError(std::size_t index, const std::string& what)
      : Error("component " + std::to_string(index) + ": " + what), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace epsim
