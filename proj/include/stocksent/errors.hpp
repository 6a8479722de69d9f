#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace stocksent {

// Base class for everything the pipeline can throw. The CLI maps subclasses
// onto exit codes: input/format problems -> 2, provider problems -> 3,
// numerical problems -> 4.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input data (bad row, bad number, bad timestamp). Carries the
// 1-based row/line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, long row = -1)
        : Error(row >= 0 ? what + " (row " + std::to_string(row) + ")" : what),
          row_(row) {}
    long row() const { return row_; }

private:
    long row_;
};

// Structurally valid input that violates an integrity rule (duplicate key,
// unknown reference).
class IntegrityError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

// Dimension or column-layout mismatch between two objects.
class ShapeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Feature dates and label dates disagree; message names the dates involved.
class AlignmentError : public Error {
public:
    using Error::Error;
};

class PlanError : public Error {
public:
    using Error::Error;
};

class ProviderError : public Error {
public:
    using Error::Error;
};

// Authentication rejected by the provider; aborts the whole batch.
class AuthError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

// Numerical failure in the fitting machinery. May name the design-matrix
// columns responsible (rank deficiency).
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what,
                          std::vector<std::string> columns = {})
        : Error(what), columns_(std::move(columns)) {}
    const std::vector<std::string>& columns() const { return columns_; }

private:
    std::vector<std::string> columns_;
};

// Operation called on a record whose status does not admit it.
class NotScorableError : public Error {
public:
    using Error::Error;
};

}  // namespace stocksent
