#pragma once

#include <stdexcept>
#include <string>

namespace hyperinject {

enum class ErrorKind {
  Parse,          // malformed input line
  Schema,         // inconsistent structure across records
  EmptyInput,
  Stratification,
  Budget,         // requested more elements than exist, or none at all
  Dimension,
  Divergence,     // non-finite loss during optimisation
  Index,
  NoElite,
  Refinement,
  Injection,
  Protocol,       // model frozen/unfrozen contract violated
  EmptyTestSet,
  Rank,
  Config,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hyperinject
