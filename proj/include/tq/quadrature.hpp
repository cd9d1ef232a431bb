#pragma once

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "tq/types.hpp"

namespace tq::quad {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Adaptive 61-point Gauss-Kronrod on [a, b]; either bound may be infinite.
template <typename F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-14, unsigned max_depth = 25) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    return GK::integrate(f, a, b, max_depth, rel_tol);
}

/// Complex-valued integrand, real and imaginary parts integrated separately.
template <typename F>
Complex integrate_complex(F&& f, double a, double b, double rel_tol = 1e-14, unsigned max_depth = 25) {
    const double re = integrate([&](double x) { return f(x).real(); }, a, b, rel_tol, max_depth);
    const double im = integrate([&](double x) { return f(x).imag(); }, a, b, rel_tol, max_depth);
    return {re, im};
}

} // namespace tq::quad
