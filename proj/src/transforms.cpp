#include "tq/transforms.hpp"

#include <cmath>
#include <string>

#include "tq/quadrature.hpp"

namespace tq {

namespace {

constexpr double kSeriesRelTol = 1e-16;
constexpr int kSeriesQuietTerms = 3;
constexpr int kSeriesCap = 10000;
constexpr double kSeriesMaxAbsZ = 50.0;

void check_kummer_args(Complex b, double z) {
    if (!(b.real() > 0.0)) throw InputError("kummer_m1 needs Re(b) > 0");
    if (!(z <= 0.0)) throw InputError("kummer_m1 is only supported for z <= 0");
}

// Accumulates terms until kSeriesQuietTerms consecutive terms are negligible.
class SeriesSum {
public:
    bool add(Complex term) {
        sum_ += term;
        quiet_ = std::abs(term) < kSeriesRelTol * std::abs(sum_) ? quiet_ + 1 : 0;
        return quiet_ >= kSeriesQuietTerms;
    }
    Complex value() const { return sum_; }

private:
    Complex sum_{0.0, 0.0};
    int quiet_ = 0;
};

} // namespace

Complex kummer_m1_direct_series(Complex b, double z) {
    check_kummer_args(b, z);
    SeriesSum sum;
    Complex term = 1.0;
    for (int n = 0; n < kSeriesCap; ++n) {
        if (sum.add(term)) return sum.value();
        term *= z / (b + static_cast<double>(n));
    }
    throw NumericalError("Kummer series did not converge within " + std::to_string(kSeriesCap) + " terms");
}

Complex kummer_m1(Complex b, double z) {
    check_kummer_args(b, z);
    const double x = -z;
    if (x <= kSeriesMaxAbsZ) {
        // e^{-x} * sum_n (b-1)/(b-1+n) * x^n / n!
        const Complex c = b - 1.0;
        SeriesSum sum;
        double power = 1.0;  // x^n / n!
        for (int n = 0; n < kSeriesCap; ++n) {
            const Complex weight = n == 0 ? Complex(1.0) : c / (c + static_cast<double>(n));
            if (sum.add(weight * power)) return std::exp(z) * sum.value();
            power *= x / (n + 1);
        }
        throw NumericalError("Kummer series did not converge within " + std::to_string(kSeriesCap) + " terms");
    }
    if (!(b.real() > 1.0))
        throw NumericalError("kummer_m1: |z| > 50 requires Re(b) > 1 for the integral route");
    const Complex q = b - 1.0;
    return quad::integrate_complex(
        [&](double t) { return q * std::exp(-q * t + z * (-std::expm1(-t))); }, 0.0, quad::kInf);
}

Complex mm1_busy_period_lst(double lambda, double mu, TransformArgument q) {
    if (!(lambda > 0.0) || !(mu > 0.0)) throw InputError("M/M/1 rates must be positive");
    const Complex a = lambda + mu + q.value();
    Complex d = std::sqrt(a * a - 4.0 * lambda * mu);
    if (std::abs(a - d) > std::abs(a + d)) d = -d;
    // small root via the product of roots mu / lambda, free of cancellation
    const Complex psi = 2.0 * mu / (a + d);
    if (std::abs(psi) > 1.0 + 1e-12) throw NumericalError("busy-period transform root outside the unit disk");
    return psi;
}

Complex mm1_busy_period_tail_transform(double lambda, double mu, TransformArgument q) {
    const Complex psi = mm1_busy_period_lst(lambda, mu, q);
    // x = 1 - psi solves lambda x^2 + (mu - lambda + q) x - q = 0
    const Complex bq = mu - lambda + q.value();
    const Complex e = std::sqrt(bq * bq + 4.0 * lambda * q.value());
    const Complex plus = bq + e;
    const Complex minus = bq - e;
    const Complex x1 = std::abs(plus) > 0.0 ? 2.0 * q.value() / plus : Complex(0.0);
    const Complex x2 = std::abs(minus) > 0.0 ? 2.0 * q.value() / minus : Complex(0.0);
    const Complex target = 1.0 - psi;
    const Complex x = std::abs(x1 - target) <= std::abs(x2 - target) ? x1 : x2;
    return x / q.value();
}

Complex bd_hitting_lst(const BirthDeathSpec& spec, int from, int target, TransformArgument q, double tol) {
    const int top = spec.top();
    if (from < spec.lower || from > top || target < spec.lower || target > top)
        throw InputError("bd_hitting_lst: states outside the chain's range");
    if (from == target) return 1.0;
    const Complex s = q.value();

    if (from < target) {
        // one-step upward passages, exact from the lower boundary
        Complex up = 0.0;  // E_{i}[e^{-q tau_{i+1}}]
        Complex result = 1.0;
        for (int i = spec.lower; i < target; ++i) {
            const double lam = spec.birth_at(i);
            const double mu = spec.death_at(i);
            up = lam / (s + lam + mu - mu * up);
            if (i >= from) result *= up;
        }
        return result;
    }

    // one-step downward passages g(i) = E_i[e^{-q tau_{i-1}}], built from the top
    auto run = [&](Complex closure) {
        Complex down = closure;  // g(top + 1)
        Complex result = 1.0;
        for (int i = top; i > target; --i) {
            const double lam = (spec.upper || i < top) ? spec.birth_at(i) : spec.birth(i);
            const double mu = spec.death_at(i);
            down = mu / (s + lam + mu - lam * down);
            if (i <= from) result *= down;
        }
        return result;
    };
    if (spec.upper) return run(0.0);
    const Complex reflecting = run(1.0);
    const Complex escaping = run(0.0);
    if (std::abs(reflecting - escaping) > tol)
        throw TruncationError("bd_hitting_lst: truncation at " + std::to_string(top) +
                              " too low (boundary sensitivity " + format_number(std::abs(reflecting - escaping)) + ")");
    return reflecting;
}

} // namespace tq
