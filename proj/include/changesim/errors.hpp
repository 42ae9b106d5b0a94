#pragma once

#include <stdexcept>
#include <string>

namespace changesim {

// Base class for all library errors. Two branches drive the CLI exit-code
// contract: UserError -> exit 2 (bad input), InternalError -> exit 1
// (numerical or invariant failure inside the library).
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class UserError : public Error {
public:
  explicit UserError(const std::string& msg) : Error(msg) {}
};

class InternalError : public Error {
public:
  explicit InternalError(const std::string& msg) : Error(msg) {}
};

// DAG DSL syntax error; carries the 1-based source position.
class DslParseError : public UserError {
public:
  DslParseError(const std::string& msg, int line, int column)
      : UserError(msg + " at line " + std::to_string(line) + ", column " +
                  std::to_string(column)),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

// Structural violation: cycle, duplicate node/edge, bad bindings, schema
// problems in scenario/SEM files, unsupported classification patterns.
class ValidationError : public UserError {
public:
  explicit ValidationError(const std::string& msg) : UserError(msg) {}
};

// A name (node, column, scenario id) that does not exist.
class UnknownNameError : public UserError {
public:
  explicit UnknownNameError(const std::string& msg) : UserError(msg) {}
};

// Command-line usage problems (flag domain errors such as oldham --n < 10).
class UsageError : public UserError {
public:
  explicit UsageError(const std::string& msg) : UserError(msg) {}
};

// Residual-variance solving found a parent combination with variance > 1,
// i.e. an inadmissible standardized coefficient set. Names the node.
class NonPositiveResidualError : public ValidationError {
public:
  explicit NonPositiveResidualError(const std::string& node, double combo_var)
      : ValidationError("non-positive residual variance at node '" + node +
                        "': parent combination has variance " +
                        std::to_string(combo_var) + " > 1"),
        node_(node) {}
  const std::string& node() const { return node_; }

private:
  std::string node_;
};

// Rank-deficient regression design (reciprocal condition number < 1e-12).
class RankDeficientError : public UserError {
public:
  explicit RankDeficientError(const std::string& msg) : UserError(msg) {}
};

}  // namespace changesim
