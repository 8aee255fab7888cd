#pragma once

#include <stdexcept>
#include <string>

namespace onco {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or invariant-violating model / thesaurus / ontology documents.
// `location` names the offending element ("classes[2].name", "line 14").
class LoadError : public Error {
 public:
  LoadError(std::string location, const std::string& message)
      : Error(location.empty() ? message : location + ": " + message),
        location_(std::move(location)) {}

  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

// Raised while turning a model into axioms.
class GenerationError : public Error {
 public:
  using Error::Error;
};

// Raised by the classifier and by index lookups on undeclared names.
class ReasonerError : public Error {
 public:
  using Error::Error;
};

// CQL AST, XML codec and grammar errors.
class CqlError : public Error {
 public:
  using Error::Error;
};

// Internal invariant violated (a bug, not bad input).
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace onco
