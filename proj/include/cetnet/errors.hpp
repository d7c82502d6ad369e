#pragma once

#include <stdexcept>
#include <string>

namespace cetnet {

// Shapes that cannot be combined by an operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Embedding lookup with an id outside the table.
class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Value outside the domain of a primitive, or a non-finite result.
class NumericError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// CSV header does not match the declared schema.
class SchemaError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Metric that is not defined on the given input (e.g. AUC of a single class).
class UndefinedMetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t batch_index, const std::string& what)
      : std::runtime_error(what), batch_index_(batch_index) {}
  std::size_t batch_index() const noexcept { return batch_index_; }

 private:
  std::size_t batch_index_;
};

}  // namespace cetnet
