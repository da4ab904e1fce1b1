#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace nerh {

// Base error. `kind` is a stable machine-readable token; the CLI emits it in
// its diagnostic JSON, so values here are part of the external interface.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& msg)
      : std::runtime_error(msg), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Malformed input bytes (JSON, CoNLL, tag syntax).
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& m) : Error("parse", m) {}
};

// Gold/prediction streams that cannot be paired position by position.
class AlignmentError : public Error {
 public:
  explicit AlignmentError(const std::string& m) : Error("alignment", m) {}
};

// Span<->tag conversion failures (misaligned spans, invalid transitions).
class CodecError : public Error {
 public:
  explicit CodecError(const std::string& m) : Error("codec", m) {}
};

// Values outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& m) : Error("domain", m) {}
};

// Structurally invalid experiment plans.
class PlanError : public Error {
 public:
  explicit PlanError(const std::string& m) : Error("plan", m) {}
};

// Annotator datasets that cannot be paired for agreement scoring.
class PairingError : public Error {
 public:
  explicit PairingError(const std::string& m) : Error("pairing", m) {}
};

// Filesystem / network trouble.
class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error("io", m) {}
};

// Training preconditions (empty dataset, no labels, ...).
class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& m) : Error("training", m) {}
};

}  // namespace nerh
