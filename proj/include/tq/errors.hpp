#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace tq {

/// Malformed input: bad model file, out-of-range parameter, violated precondition.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation could not certify its own accuracy (cancellation, truncation,
/// non-convergence, inconsistent oracle).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Truncated state space too small for the requested accuracy.
class TruncationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Short form of a double for diagnostics (std::to_string prints 0.000000
/// for anything small).
inline std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

} // namespace tq
