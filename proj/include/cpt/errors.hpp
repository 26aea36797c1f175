#pragma once

#include <stdexcept>
#include <string>

namespace cpt {

// Base class for all engine errors. Subclasses mark the failure family so
// callers can map them to diagnostics and exit codes without string matching.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed syntax in an input stream (bad JSON, bad config line).
struct ParseError : Error {
    using Error::Error;
};

// Structurally valid input that violates the record schema: unknown
// enumeration value, missing required field, wrong field type.
struct SchemaError : Error {
    using Error::Error;
};

// Duplicate trial_id within one loaded set.
struct DuplicateError : Error {
    using Error::Error;
};

// Invalid or unusable configuration (bad threshold, unreadable registry,
// empty marker list where one is required).
struct ConfigError : Error {
    using Error::Error;
};

// Numeric argument outside its documented domain.
struct RangeError : Error {
    using Error::Error;
};

// Statistic requested over an empty collection.
struct EmptyInputError : Error {
    using Error::Error;
};

// Statistic undefined for the given data (e.g. dispersion with zero median).
struct DegenerateError : Error {
    using Error::Error;
};

} // namespace cpt
