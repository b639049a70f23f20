#pragma once

#include <stdexcept>
#include <string>

namespace aab {

// Base class for all toolkit errors. Subclasses distinguish failure modes
// that callers may want to handle separately (parse vs. lookup vs. math).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input is geometrically meaningless (zero-norm vector, zero spread, ...).
struct DegenerateInputError : Error {
    using Error::Error;
};

// An entity id was not found where it was required.
struct LookupError : Error {
    using Error::Error;
};

// A structural invariant was violated (overlapping groups, bad config, ...).
struct ValidationError : Error {
    using Error::Error;
};

// A file could not be parsed; message carries the line/record number.
struct ParseError : Error {
    using Error::Error;
};

// Not enough data points to compute the requested statistic.
struct InsufficientDataError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace aab
