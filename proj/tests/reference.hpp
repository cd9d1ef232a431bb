#pragma once

// Brute-force reference computations owned by the tests. None of these call
// the library routine they are used to check.

#include <cmath>
#include <complex>
#include <functional>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/binomial.hpp>

namespace ref {

inline double integrate(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

/// int_0^inf q exp(-(q t + rho (1 - e^{-mu t}))) dt
inline double kummer_integral(double q, double mu, double rho) {
    return integrate([&](double t) { return q * std::exp(-(q * t + rho * (1.0 - std::exp(-mu * t)))); }, 0.0,
                     std::numeric_limits<double>::infinity());
}

/// P_k(Q(t) = s) for M/M/inf: binomial(k, e^{-mu t}) plus Poisson(rho (1 - e^{-mu t})).
inline double mminfty_transient(int k, int s, double rho, double mu, double t) {
    const double p = std::exp(-mu * t);
    double total = 0.0;
    for (int j = 0; j <= std::min(k, s); ++j) {
        const double m = rho * (1.0 - p);
        const double pois = std::exp(-m) * std::pow(m, s - j) / std::tgamma(s - j + 1.0);
        total += boost::math::binomial_coefficient<double>(k, j) * std::pow(p, j) * std::pow(1.0 - p, k - j) * pois;
    }
    return total;
}

/// P_k(Q(e_q) = s) for M/M/inf by quadrature of the transient pmf.
inline double mminfty_at_exponential(int k, int s, double rho, double mu, double q) {
    return integrate([&](double t) { return q * std::exp(-q * t) * mminfty_transient(k, s, rho, mu, t); }, 0.0,
                     std::numeric_limits<double>::infinity());
}

/// psi from first-step analysis: psi = (mu + lambda psi^2) / (lambda + mu + q), iterated.
inline double psi_fixed_point(double lambda, double mu, double q) {
    double psi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double next = (mu + lambda * psi * psi) / (lambda + mu + q);
        if (std::abs(next - psi) < 1e-17) return next;
        psi = next;
    }
    return psi;
}

/// E_from[e^{-q tau_target}] for a birth-death chain on {lower..top} by a dense
/// solve with target absorbing. birth/death are rate functions of the level.
inline double dense_hitting(const std::function<double(int)>& birth, const std::function<double(int)>& death,
                            int lower, int top, int from, int target, double q) {
    if (from == target) return 1.0;
    const int n = top - lower + 1;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (int i = lower; i <= top; ++i) {
        const int r = i - lower;
        if (i == target) {
            a(r, r) = 1.0;
            rhs(r) = 1.0;
            continue;
        }
        const double up = i < top ? birth(i) : 0.0;
        const double down = i > lower ? death(i) : 0.0;
        a(r, r) = q + up + down;
        if (up > 0.0) a(r, r + 1) = -up;
        if (down > 0.0) a(r, r - 1) = -down;
    }
    const Eigen::VectorXd h = a.partialPivLu().solve(rhs);
    return h(from - lower);
}

/// Row `initial` of q (qI - G)^{-1} for a birth-death chain on {0..top}, dense
/// LU, complex q allowed.
inline Eigen::VectorXcd dense_resolvent(const std::function<double(int)>& birth,
                                        const std::function<double(int)>& death, int top, int initial,
                                        std::complex<double> q) {
    const int n = top + 1;
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i <= top; ++i) {
        const double up = i < top ? birth(i) : 0.0;
        const double down = i > 0 ? death(i) : 0.0;
        a(i, i) = q + up + down;
        if (up > 0.0) a(i, i + 1) = -up;
        if (down > 0.0) a(i, i - 1) = -down;
    }
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
    e(initial) = q;
    // row of the inverse = solve with the transpose
    return a.transpose().partialPivLu().solve(e);
}

} // namespace ref
