#pragma once

#include <complex>
#include <string>

#include "tq/errors.hpp"

namespace tq {

using Complex = std::complex<double>;

/// Killing rate q of the exponential clock e_q. Complex values with positive
/// real part turn e_q-probabilities into q-scaled Laplace transforms in time.
class TransformArgument {
public:
    TransformArgument(double q) : value_(q, 0.0) { validate(); }  // NOLINT(implicit)
    TransformArgument(Complex q) : value_(q) { validate(); }       // NOLINT(implicit)

    Complex value() const { return value_; }
    double real() const { return value_.real(); }
    bool is_real() const { return value_.imag() == 0.0; }
    TransformArgument conj() const { return TransformArgument(std::conj(value_)); }

private:
    void validate() const {
        if (!(value_.real() > 0.0) || !std::isfinite(value_.real()) || !std::isfinite(value_.imag()))
            throw InputError("transform argument must have finite, strictly positive real part");
    }

    Complex value_;
};

} // namespace tq
