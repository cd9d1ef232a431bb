#include "tq/rbm.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace tq {

namespace {

constexpr double kBranchTol = 1e-9;

template <typename T>
struct Exponents {
    T q, r, alpha, beta;
    explicit Exponents(T q_) : q(q_), r(std::sqrt(1.0 + 2.0 * q_)), alpha(2.0 * q_ / (r + 1.0)), beta(r + 1.0) {}
};

// e^{-alpha x0 - beta x} and e^{-beta (x - x0)} are the only growth-free
// combinations; every closed form is written in terms of them.
template <typename T>
T density_upper(double x, double x0, const Exponents<T>& e) {
    const T joint = std::exp(-e.alpha * x0 - e.beta * x);
    return e.beta * joint + (e.q / e.r) * (std::exp(-e.beta * (x - x0)) - joint);
}

template <typename T>
T density_lower(double x, double x0, const Exponents<T>& e) {
    return (e.q / e.r) * std::exp(-e.alpha * (x0 - x)) +
           ((e.r + 1.0 + e.q) / e.r) * std::exp(-e.alpha * x0 - e.beta * x);
}

template <typename T>
T density(double x, double x0, const Exponents<T>& e) {
    if (x > x0) return density_upper(x, x0, e);
    if (x < x0) return density_lower(x, x0, e);
    const T up = density_upper(x, x0, e);
    const T low = density_lower(x, x0, e);
    if (std::abs(up - low) > kBranchTol * std::max(1.0, std::abs(up)))
        throw NumericalError("density branches disagree at x0 by " + format_number(std::abs(up - low)));
    return up;
}

template <typename T>
T survival(double x, double x0, const Exponents<T>& e) {
    if (x <= 0.0) return 1.0;
    const T joint = std::exp(-e.alpha * x0 - e.beta * x);
    const T half = e.alpha / (2.0 * e.r);
    if (x >= x0) return joint + half * (std::exp(-e.beta * (x - x0)) - joint);
    return 1.0 - std::exp(-e.alpha * (x0 - x)) + joint +
           half * (std::exp(-e.alpha * (x0 - x)) - joint);
}

void check_point(double x) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw InputError("RBM evaluation point must be finite and >= 0");
}

} // namespace

RbmQuery::RbmQuery(double x0_, double q_) : x0(x0_), q(q_) {
    if (!(x0 >= 0.0) || !std::isfinite(x0)) throw InputError("RBM initial level must be finite and >= 0");
    if (!(q > 0.0) || !std::isfinite(q)) throw InputError("RBM killing rate must be positive and finite");
}

double RbmQuery::root() const { return std::sqrt(1.0 + 2.0 * q); }
double RbmQuery::alpha() const { return 2.0 * q / (root() + 1.0); }
double RbmQuery::beta() const { return root() + 1.0; }

Complex rbm_hitting_lst(double x, TransformArgument q) {
    check_point(x);
    if (q.is_real()) return std::exp(-RbmQuery(0.0, q.real()).alpha() * x);
    return std::exp(-Exponents<Complex>(q.value()).alpha * x);
}

RbmTransientLaw rbm_infimum_law(const RbmQuery& query) {
    const double a = query.alpha();
    const double x0 = query.x0;
    RbmTransientLaw law;
    law.atom = std::exp(-a * x0);
    law.support_end = x0;
    law.density = [a, x0](double z) { return z > 0.0 && z < x0 ? a * std::exp(-a * (x0 - z)) : 0.0; };
    return law;
}

double rbm_density(double x, const RbmQuery& query) {
    check_point(x);
    return density(x, query.x0, Exponents<double>(query.q));
}

double rbm_density_lower_expanded(double x, const RbmQuery& query) {
    check_point(x);
    const double r = query.root(), a = query.alpha(), b = query.beta(), x0 = query.x0;
    const double base = std::exp(-a * x0);
    return a * base * std::exp(a * x) + b * base * std::exp(-b * x) -
           (a / (2.0 * r)) * base * (a * std::exp(a * x) + b * std::exp(-b * x));
}

double rbm_survival(double x, const RbmQuery& query) {
    check_point(x);
    return survival(x, query.x0, Exponents<double>(query.q));
}

RbmTransientLaw rbm_transient_law(const RbmQuery& query) {
    RbmTransientLaw law;
    law.atom = 0.0;
    law.support_end = std::numeric_limits<double>::infinity();
    law.density = [query](double x) { return rbm_density(x, query); };
    return law;
}

Complex rbm_density_transform(double x, double x0, TransformArgument q) {
    check_point(x);
    check_point(x0);
    return density(x, x0, Exponents<Complex>(q.value()));
}

Complex rbm_survival_transform(double x, double x0, TransformArgument q) {
    check_point(x);
    check_point(x0);
    return survival(x, x0, Exponents<Complex>(q.value()));
}

} // namespace tq
