#pragma once

#include <functional>
#include <vector>

#include "tq/types.hpp"

namespace tq {

/// F(s) = int_0^inf e^{-s t} f(t) dt, evaluable for Re(s) > 0.
using TransformEvaluator = std::function<Complex(Complex)>;

/// f(t) by Euler summation of the Bromwich trapezoid series. The contour sits
/// at A / (2t) with A = digits * ln 10; the series is cut after `digits`
/// terms and averaged binomially over the next 2 * digits partial sums
/// (3 * digits + 1 transform calls). InputError above 12 digits.
double euler_invert(const TransformEvaluator& f, double t, int digits = 11);

/// Componentwise inversion of a vector-valued transform; each node is
/// evaluated once for all components.
std::vector<double> euler_invert_vector(const std::function<std::vector<Complex>(Complex)>& f, double t,
                                        int digits = 11);

} // namespace tq
