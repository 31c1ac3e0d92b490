#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bvmi {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shapes, index sets, or split lengths disagree.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Invalid argument value (negative tolerance, m < 1, grid size < 2, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

// A matrix that must be symmetric positive definite is not, or a
// factorization of it failed.
class NotSpdError : public Error {
public:
    using Error::Error;
};

// One or more assets have no observed value inside the training block.
// Under a flat prior the mean-parameter precision is singular in exactly
// these coordinates, so the condition is surfaced as its own error type;
// callers that generate random masks may catch it and retry.
class CoverageError : public Error {
public:
    CoverageError(const std::string& what, std::vector<int> rows)
        : Error(what), rows_(std::move(rows)) {}

    // Offending asset (row) indices, ascending.
    const std::vector<int>& offending_rows() const { return rows_; }

private:
    std::vector<int> rows_;
};

// Malformed or unusable input file (bad cell, sentinel value, short file).
class IngestError : public Error {
public:
    using Error::Error;
};

// Malformed experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace bvmi
