#ifndef CRE_ERROR_H_
#define CRE_ERROR_H_

#include <stdexcept>
#include <string>
#include <utility>

namespace cre {

// Base class for every error raised by the toolkit. code() is a short stable
// token used in machine-parsable CLI error lines.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// Malformed input file or record.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message)
      : Error("parse_error", message) {}
};

// Well-formed input that violates a documented invariant.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error("validation_error", message) {}
};

// A referenced id (instance, sentence, record) does not exist.
class NotFoundError : public Error {
 public:
  explicit NotFoundError(const std::string& message)
      : Error("not_found", message) {}
};

// Two sources produce the same id where ids must be unique.
class CollisionError : public Error {
 public:
  explicit CollisionError(const std::string& message)
      : Error("id_collision", message) {}
};

// Remote predictor failed after retries, or returned a malformed batch.
class TransportError : public Error {
 public:
  explicit TransportError(const std::string& message)
      : Error("transport_error", message) {}
};

}  // namespace cre

#endif  // CRE_ERROR_H_
