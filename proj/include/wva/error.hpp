#pragma once

#include <stdexcept>
#include <string>

namespace wva {

enum class ErrorKind {
  Validation,      // a state, POVM or matrix fails its invariants
  Domain,          // argument outside the admissible range
  Singular,        // closed form evaluated at a pole
  UndefinedState,  // conditional state with vanishing probability
  Model,           // noise model violates positivity
  Config,          // malformed user configuration
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace wva
