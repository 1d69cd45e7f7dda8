#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rbias {

// Every library failure derives from Error. The CLI maps ConfigError and
// DataError to exit code 2 and NumericalError to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid arguments, configs, or usage contracts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Numerical blow-up or a geometric degeneracy that makes a quantity undefined.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class MissingColumn : public DataError {
 public:
  explicit MissingColumn(std::string column)
      : DataError("missing column: " + column), column_(std::move(column)) {}
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

class NonNumericFeature : public DataError {
 public:
  NonNumericFeature(std::size_t row, std::size_t col, const std::string& cell)
      : DataError("non-numeric feature at row " + std::to_string(row) +
                  ", column " + std::to_string(col) + ": '" + cell + "'"),
        row_(row),
        col_(col) {}
  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

class EmptyFile : public DataError {
 public:
  using DataError::DataError;
};

class EmptyClass : public DataError {
 public:
  using DataError::DataError;
};

class DegeneratePartition : public DataError {
 public:
  using DataError::DataError;
};

class UnknownAttribute : public DataError {
 public:
  explicit UnknownAttribute(const std::string& name)
      : DataError("unknown attribute: " + name) {}
};

class DegenerateModel : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateGradient : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateComplement : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

enum class Side { kPartition, kComplement };

class NoCorrectExamples : public DataError {
 public:
  explicit NoCorrectExamples(Side side)
      : DataError(side == Side::kPartition
                      ? "no correctly classified examples inside the partition"
                      : "no correctly classified examples outside the partition"),
        side_(side) {}
  Side side() const { return side_; }

 private:
  Side side_;
};

}  // namespace rbias
