#pragma once

#include <stdexcept>
#include <string>

namespace mppnc {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invariant violation on a domain type (profile, frame, config, ...).
struct ValidationError : Error {
    using Error::Error;
};

/// A matched-filter integration window collapsed below eps_window.
struct DegenerateWindowError : ValidationError {
    using ValidationError::ValidationError;
};

/// Quadruple sampling requires 0 < tau1 < delta < delta + l1 < 1 with two taps per node.
struct OrderingError : ValidationError {
    using ValidationError::ValidationError;
};

/// Total message underflow inside belief propagation.
struct DecodingFailure : Error {
    using Error::Error;
};

/// Bad key, value, or combination in an experiment config file.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace mppnc
