#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tabver {

/// Root of every error this library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- table_store ----------------------------------------------------------

class DecodeError : public Error {
 public:
  explicit DecodeError(std::size_t offset)
      : Error("input is not valid UTF-8 at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class EmptyTableError : public Error {
 public:
  EmptyTableError() : Error("table has no header or no data rows") {}
};

class RaggedRowError : public Error {
 public:
  RaggedRowError(std::size_t line, std::size_t got, std::size_t want)
      : Error("line " + std::to_string(line) + ": expected " + std::to_string(want) +
              " cells, got " + std::to_string(got)),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class InvalidHeaderError : public Error {
 public:
  explicit InvalidHeaderError(std::size_t column)
      : Error("column " + std::to_string(column) + " has an empty name"), column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

class AmbiguousColumnError : public Error {
 public:
  explicit AmbiguousColumnError(const std::string& name)
      : Error("column name '" + name + "' matches more than one header") {}
};

// ---- logic_dsl ------------------------------------------------------------

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& what)
      : Error("syntax error at " + std::to_string(position) + ": " + what), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class UnknownFunctionError : public Error {
 public:
  explicit UnknownFunctionError(std::string name)
      : Error("unknown function '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class ArityError : public Error {
 public:
  ArityError(std::string name, std::size_t got, std::size_t want)
      : Error("function '" + name + "' takes " + std::to_string(want) + " arguments, got " +
              std::to_string(got)),
        name_(std::move(name)), got_(got), want_(want) {}
  const std::string& name() const { return name_; }
  std::size_t got() const { return got_; }
  std::size_t want() const { return want_; }

 private:
  std::string name_;
  std::size_t got_;
  std::size_t want_;
};

// ---- executor -------------------------------------------------------------

enum class ExecErrorKind { Sort, UnresolvedColumn, AmbiguousColumn, EmptyView, Cardinality };

inline const char* to_string(ExecErrorKind k) {
  switch (k) {
    case ExecErrorKind::Sort: return "SortError";
    case ExecErrorKind::UnresolvedColumn: return "UnresolvedColumnError";
    case ExecErrorKind::AmbiguousColumn: return "AmbiguousColumnError";
    case ExecErrorKind::EmptyView: return "EmptyViewError";
    case ExecErrorKind::Cardinality: return "CardinalityError";
  }
  return "?";
}

class ExecError : public Error {
 public:
  ExecError(ExecErrorKind kind, const std::string& what)
      : Error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ExecErrorKind kind() const { return kind_; }

 private:
  ExecErrorKind kind_;
};

// ---- lpa_synth / evidence / graph ------------------------------------------

class InvalidBudgetError : public Error {
 public:
  using Error::Error;
};

class EmptyEvidenceError : public Error {
 public:
  EmptyEvidenceError() : Error("cannot build a graph from an empty evidence set") {}
};

class NodeNotFoundError : public Error {
 public:
  explicit NodeNotFoundError(std::size_t id) : Error("no live node with id " + std::to_string(id)) {}
};

// ---- encoder ----------------------------------------------------------------

class SequenceTooLongError : public Error {
 public:
  SequenceTooLongError(std::size_t got, std::size_t limit)
      : Error("sequence of " + std::to_string(got) + " tokens exceeds limit " + std::to_string(limit)) {}
};

class SpanNotFoundError : public Error {
 public:
  using Error::Error;
};

class ExternalEncoderError : public Error {
 public:
  using Error::Error;
};

// ---- verifier ---------------------------------------------------------------

class DimensionError : public Error {
 public:
  using Error::Error;
};

class EmptyGraphError : public Error {
 public:
  EmptyGraphError() : Error("attentive pooling over an empty node set") {}
};

class NonFiniteLossError : public Error {
 public:
  explicit NonFiniteLossError(std::size_t batch)
      : Error("non-finite loss in batch " + std::to_string(batch)), batch_(batch) {}
  std::size_t batch() const { return batch_; }

 private:
  std::size_t batch_;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

// ---- harness ----------------------------------------------------------------

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ManifestParseError : public Error {
 public:
  ManifestParseError(std::size_t line, const std::string& what)
      : Error("manifest line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class MissingTableError : public Error {
 public:
  explicit MissingTableError(std::vector<std::size_t> lines, const std::string& what)
      : Error(what), lines_(std::move(lines)) {}
  const std::vector<std::size_t>& lines() const { return lines_; }

 private:
  std::vector<std::size_t> lines_;
};

}  // namespace tabver
