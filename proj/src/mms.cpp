#include "tq/mms.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "tq/transforms.hpp"

namespace tq {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kCancellationTol = 1e-10;
constexpr double kRangeTol = 1e-10;
constexpr double kMaxClosedFormRho = 30.0;
constexpr int kMaxClosedFormLevel = 40;
constexpr double kMeanCheckTol = 1e-7;

// Neumaier summation on each component, plus the sum of moduli for an error bound.
class CompensatedSum {
public:
    void add(Complex x) {
        add_part(re_, re_c_, x.real());
        add_part(im_, im_c_, x.imag());
        magnitude_ += std::abs(x);
    }
    Complex value() const { return {re_ + re_c_, im_ + im_c_}; }
    double magnitude() const { return magnitude_; }

private:
    static void add_part(double& sum, double& comp, double x) {
        const double t = sum + x;
        comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    double re_ = 0.0, re_c_ = 0.0, im_ = 0.0, im_c_ = 0.0, magnitude_ = 0.0;
};

double log_binomial(int n, int k) { return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0); }

struct PointSum {
    Complex value;
    double error;
};

PointSum point_sum(int k, int s, const MmsParams& p, TransformArgument q) {
    const double rho = p.rho();
    const Complex qv = q.value();
    CompensatedSum sum;
    for (int j = 0; j <= k; ++j) {
        const int width = k + s - 2 * j;
        const double log_outer = log_binomial(k, j) + (s - j) * std::log(rho) - std::lgamma(s - j + 1.0);
        for (int m = 0; m <= width; ++m) {
            const double coef = std::exp(log_outer + log_binomial(width, m)) * (m % 2 == 0 ? 1.0 : -1.0);
            const Complex shifted = qv + static_cast<double>(j + m) * p.mu;
            sum.add(coef * (qv / shifted) * kummer_m1(qv / p.mu + static_cast<double>(j + m + 1), -rho));
        }
    }
    // each term carries a few ulps from the Kummer evaluation
    return {sum.value(), 16.0 * kEps * sum.magnitude()};
}

bool closed_form_usable(const PointSum& v) {
    return std::abs(v.value) > 0.0 && v.error <= kCancellationTol * std::abs(v.value);
}

BirthDeathSpec mminfty_chain(const MmsParams& p, int top) {
    BirthDeathSpec spec;
    spec.lower = 0;
    spec.birth = RateMap::constant(p.lambda);
    spec.death = RateMap::linear(p.mu);
    spec.truncation = std::max(top + 1, 1);
    return spec;
}

std::vector<Complex> recursion_row(int l, const MmsParams& p, TransformArgument q) {
    const BirthDeathSpec chain = mminfty_chain(p, l);
    std::vector<Complex> row(static_cast<std::size_t>(l) + 1);
    for (int j = 0; j <= l; ++j) row[static_cast<std::size_t>(j)] = bd_hitting_lst(chain, j, l, q);
    return row;
}

void check_probability(Complex v, TransformArgument q, const char* what) {
    if (!q.is_real()) return;
    if (!(v.real() >= -kRangeTol && v.real() <= 1.0 + kRangeTol))
        throw NumericalError(std::string(what) + " outside [0, 1]: " + format_number(v.real()));
}

// pi_n / pi_s for n <= s
std::vector<double> weights_to_s(int s, double rho) {
    std::vector<double> v(static_cast<std::size_t>(s) + 1);
    v[static_cast<std::size_t>(s)] = 1.0;
    for (int n = s; n > 0; --n) v[static_cast<std::size_t>(n - 1)] = v[static_cast<std::size_t>(n)] * n / rho;
    return v;
}

// Law of the loss system on {0..l} started from l: pi_n E_n[tau_l] normalized.
std::vector<Complex> loss_law(int l, const std::vector<Complex>& hit, const std::vector<double>& w) {
    std::vector<Complex> law(static_cast<std::size_t>(l) + 1);
    Complex z = 0.0;
    for (int n = 0; n <= l; ++n) {
        law[static_cast<std::size_t>(n)] = w[static_cast<std::size_t>(n)] * hit[static_cast<std::size_t>(n)];
        z += law[static_cast<std::size_t>(n)];
    }
    for (auto& x : law) x /= z;
    return law;
}

// Pieces shared by the k < s branches of M/M/s and M/M/s/K.
struct LowerPart {
    std::vector<double> w;                 // pi_n / pi_s, n <= s
    std::vector<std::vector<Complex>> hit; // hit[l][j] = E_j[tau_l], l <= s
};

LowerPart lower_part(int k_from, const MmsParams& p, TransformArgument q) {
    LowerPart lp;
    lp.w = weights_to_s(p.s, p.rho());
    lp.hit.resize(static_cast<std::size_t>(p.s) + 1);
    for (int l = std::max(k_from, 0); l <= p.s; ++l) lp.hit[static_cast<std::size_t>(l)] = mminfty_hitting_row(l, p, q);
    return lp;
}

// Adds the sup-conditioned terms for k < s, n < s.
Complex below_s_correction(int k, int n, const MmsParams& p, const LowerPart& lp) {
    Complex extra = 0.0;
    for (int l = std::max(k, n); l <= p.s - 1; ++l) {
        const auto& row = lp.hit[static_cast<std::size_t>(l)];
        const auto law = loss_law(l, row, lp.w);
        const Complex p_sup = row[static_cast<std::size_t>(k)] - lp.hit[static_cast<std::size_t>(l + 1)][static_cast<std::size_t>(k)];
        extra += law[static_cast<std::size_t>(n)] * p_sup;
    }
    return extra;
}

} // namespace

void MmsParams::validate() const {
    if (!(lambda > 0.0) || !(mu > 0.0) || !std::isfinite(lambda) || !std::isfinite(mu))
        throw InputError("M/M/s rates must be positive and finite");
    if (s < 1) throw InputError("M/M/s needs at least one server");
    if (capacity && *capacity <= s) throw InputError("M/M/s/K needs s < K");
}

BirthDeathSpec MmsParams::as_birth_death(int truncation) const {
    BirthDeathSpec spec;
    spec.lower = 0;
    spec.upper = capacity;
    spec.birth = RateMap::constant(lambda);
    spec.death = RateMap::linear_capped(mu, s);
    spec.truncation = truncation;
    return spec;
}

Complex mminfty_point_pmf(int k, int s, const MmsParams& p, TransformArgument q) {
    p.validate();
    if (k < 0 || k > s) throw InputError("M/M/inf point pmf needs 0 <= k <= s");
    const PointSum v = point_sum(k, s, p, q);
    // a probability: absolute accuracy is what matters here; the hitting
    // ratios below need the stricter relative check
    if (v.error > kCancellationTol)
        throw NumericalError("M/M/inf point pmf lost accuracy to cancellation (error bound " +
                             format_number(v.error) + ")");
    check_probability(v.value, q, "M/M/inf point pmf");
    return q.is_real() ? Complex(v.value.real(), 0.0) : v.value;
}

std::vector<Complex> mminfty_hitting_row(int l, const MmsParams& p, TransformArgument q) {
    p.validate();
    if (l < 0) throw InputError("hitting level must be nonnegative");
    if (p.rho() <= kMaxClosedFormRho && l <= kMaxClosedFormLevel) {
        const PointSum denom = point_sum(l, l, p, q);
        if (closed_form_usable(denom)) {
            std::vector<Complex> row(static_cast<std::size_t>(l) + 1);
            bool ok = true;
            for (int j = 0; j < l && ok; ++j) {
                const PointSum num = point_sum(j, l, p, q);
                ok = closed_form_usable(num);
                row[static_cast<std::size_t>(j)] = num.value / denom.value;
            }
            row[static_cast<std::size_t>(l)] = 1.0;
            if (ok) return row;
        }
    }
    return recursion_row(l, p, q);
}

Complex mminfty_hitting_lst(int k, int s, const MmsParams& p, TransformArgument q, HittingMethod* method) {
    p.validate();
    if (k < 0 || k > s) throw InputError("M/M/inf hitting transform needs 0 <= k <= s");
    if (method) *method = HittingMethod::ClosedForm;
    if (k == s) return 1.0;
    if (p.rho() <= kMaxClosedFormRho && s <= kMaxClosedFormLevel) {
        const PointSum num = point_sum(k, s, p, q);
        const PointSum denom = point_sum(s, s, p, q);
        if (closed_form_usable(num) && closed_form_usable(denom)) return num.value / denom.value;
    }
    if (method) *method = HittingMethod::Recursion;
    return bd_hitting_lst(mminfty_chain(p, s), k, s, q);
}

std::vector<Complex> reversible_pmf(const BirthDeathSpec& spec, int k, TransformArgument q) {
    spec.validate();
    const int top = spec.top();
    if (k < spec.lower || k > top) throw InputError("initial state outside the chain");
    // pi relative to pi_k by detailed balance, built outward from k
    std::vector<double> log_pi(static_cast<std::size_t>(top - spec.lower) + 1, 0.0);
    for (int n = k + 1; n <= top; ++n) {
        const double up = spec.birth_at(n - 1), down = spec.death_at(n);
        log_pi[static_cast<std::size_t>(n - spec.lower)] =
            up > 0.0 && down > 0.0 ? log_pi[static_cast<std::size_t>(n - 1 - spec.lower)] + std::log(up / down)
                                   : -std::numeric_limits<double>::infinity();
    }
    for (int n = k - 1; n >= spec.lower; --n) {
        const double up = spec.birth_at(n), down = spec.death_at(n + 1);
        log_pi[static_cast<std::size_t>(n - spec.lower)] =
            up > 0.0 && down > 0.0 ? log_pi[static_cast<std::size_t>(n + 1 - spec.lower)] + std::log(down / up)
                                   : -std::numeric_limits<double>::infinity();
    }
    std::vector<Complex> out(log_pi.size());
    Complex z = 0.0;
    for (int n = spec.lower; n <= top; ++n) {
        const double lp = log_pi[static_cast<std::size_t>(n - spec.lower)];
        const Complex v = std::isfinite(lp) ? std::exp(lp) * bd_hitting_lst(spec, n, k, q) : Complex(0.0);
        out[static_cast<std::size_t>(n - spec.lower)] = v;
        z += v;
    }
    for (auto& v : out) {
        v /= z;
        check_probability(v, q, "birth-death pmf");
        if (q.is_real()) v = Complex(v.real(), 0.0);
    }
    return out;
}

std::vector<Complex> mms_pmf_row(int k, int n_max, const MmsParams& p, TransformArgument q) {
    p.validate();
    if (p.capacity) throw InputError("mms_pmf is for the infinite-buffer queue; use mmsk_pmf");
    if (k < 0 || n_max < 0) throw InputError("M/M/s levels must be nonnegative");
    const int s = p.s;
    const Complex psi = mm1_busy_period_lst(p.lambda, s * p.mu, q);
    const Complex r = p.lambda * psi / (s * p.mu);
    const LowerPart lp = lower_part(k < s ? k : s, p, q);
    const auto& hit_s = lp.hit[static_cast<std::size_t>(s)];

    // P_s(Q(e_q) = n), weights relative to pi_s
    Complex z = r / (1.0 - r);
    for (int j = 0; j <= s; ++j) z += lp.w[static_cast<std::size_t>(j)] * hit_s[static_cast<std::size_t>(j)];
    auto base = [&](int n) -> Complex {
        if (n <= s) return lp.w[static_cast<std::size_t>(n)] * hit_s[static_cast<std::size_t>(n)] / z;
        return std::pow(r, n - s) / z;
    };

    std::vector<Complex> out(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) {
        Complex v;
        if (k == s) {
            v = base(n);
        } else if (k > s) {
            v = base(n) * std::pow(psi, k - s);
            for (int l = s + 1; l <= std::min(n, k); ++l)
                v += (1.0 - r) * std::pow(r, n - l) * (std::pow(psi, k - l) - std::pow(psi, k - l + 1));
        } else {
            v = base(n) * hit_s[static_cast<std::size_t>(k)];
            if (n < s) v += below_s_correction(k, n, p, lp);
        }
        check_probability(v, q, "M/M/s pmf");
        out[static_cast<std::size_t>(n)] = q.is_real() ? Complex(v.real(), 0.0) : v;
    }
    return out;
}

Complex mms_pmf(int k, int n, const MmsParams& p, TransformArgument q) {
    if (n < 0) throw InputError("M/M/s levels must be nonnegative");
    return mms_pmf_row(k, n, p, q)[static_cast<std::size_t>(n)];
}

std::vector<Complex> mmsk_pmf_row(int k, const MmsParams& p, TransformArgument q) {
    p.validate();
    if (!p.capacity) throw InputError("mmsk_pmf needs a capacity K");
    const int s = p.s;
    const int cap = *p.capacity;
    if (k < 0 || k > cap) throw InputError("initial level outside {0..K}");
    const double ratio = p.rho() / s;

    BirthDeathSpec upper;
    upper.lower = s;
    upper.upper = cap;
    upper.birth = RateMap::constant(p.lambda);
    upper.death = RateMap::constant(s * p.mu);
    auto down = [&](int from, int to) { return bd_hitting_lst(upper, from, to, q); };

    const LowerPart lp = lower_part(k < s ? k : s, p, q);
    const auto& hit_s = lp.hit[static_cast<std::size_t>(s)];

    std::vector<Complex> above(static_cast<std::size_t>(cap - s) + 1);  // pi_n E_n[tau_s] / pi_s
    Complex z = 0.0;
    for (int j = 0; j < s; ++j) z += lp.w[static_cast<std::size_t>(j)] * hit_s[static_cast<std::size_t>(j)];
    for (int n = s; n <= cap; ++n) {
        above[static_cast<std::size_t>(n - s)] = std::pow(ratio, n - s) * down(n, s);
        z += above[static_cast<std::size_t>(n - s)];
    }
    auto base = [&](int n) -> Complex {
        if (n < s) return lp.w[static_cast<std::size_t>(n)] * hit_s[static_cast<std::size_t>(n)] / z;
        return above[static_cast<std::size_t>(n - s)] / z;
    };

    // law of the chain on {l..K} from l: pi_n E_n[tau_l] normalized
    auto upper_law = [&](int l) {
        std::vector<Complex> law(static_cast<std::size_t>(cap - l) + 1);
        Complex zl = 0.0;
        for (int n = l; n <= cap; ++n) {
            law[static_cast<std::size_t>(n - l)] = std::pow(ratio, n - l) * down(n, l);
            zl += law[static_cast<std::size_t>(n - l)];
        }
        for (auto& x : law) x /= zl;
        return law;
    };

    std::vector<Complex> out(static_cast<std::size_t>(cap) + 1);
    std::vector<std::vector<Complex>> laws;
    if (k > s)
        for (int l = s + 1; l <= k; ++l) laws.push_back(upper_law(l));
    for (int n = 0; n <= cap; ++n) {
        Complex v;
        if (k == s) {
            v = base(n);
        } else if (k > s) {
            v = base(n) * down(k, s);
            for (int l = s + 1; l <= std::min(n, k); ++l) {
                const Complex p_inf = down(k, l) - down(k, l - 1);
                v += laws[static_cast<std::size_t>(l - s - 1)][static_cast<std::size_t>(n - l)] * p_inf;
            }
        } else {
            v = base(n) * hit_s[static_cast<std::size_t>(k)];
            if (n < s) v += below_s_correction(k, n, p, lp);
        }
        check_probability(v, q, "M/M/s/K pmf");
        out[static_cast<std::size_t>(n)] = q.is_real() ? Complex(v.real(), 0.0) : v;
    }
    return out;
}

Complex mmsk_pmf(int k, int n, const MmsParams& p, TransformArgument q) {
    p.validate();
    if (!p.capacity || n < 0 || n > *p.capacity) throw InputError("target level outside {0..K}");
    return mmsk_pmf_row(k, p, q)[static_cast<std::size_t>(n)];
}

double mm1_mean(int n0, double lambda, double mu, TransformArgument q) {
    if (!q.is_real()) throw InputError("means are computed for real q");
    if (n0 < 0) throw InputError("initial level must be nonnegative");
    if (!(lambda > 0.0) || !(mu > lambda)) throw InputError("M/M/1 mean needs 0 < lambda < mu");
    const double psi = mm1_busy_period_lst(lambda, mu, q).real();
    double mean = lambda * mm1_busy_period_tail_transform(lambda, mu, q).real();
    for (int k = 1; k <= n0; ++k) mean += k * std::pow(psi, n0 - k) * (1.0 - psi);
    return mean;
}

MmsMeanReport mms_mean(int i, const MmsParams& p, TransformArgument q) {
    p.validate();
    if (p.capacity) throw InputError("mms_mean is for the infinite-buffer queue");
    if (!q.is_real()) throw InputError("means are computed for real q");
    if (i < 0) throw InputError("initial level must be nonnegative");
    if (!(p.lambda < p.s * p.mu)) throw InputError("M/M/s mean needs lambda < s mu");
    const int s = p.s;
    const double psi = mm1_busy_period_lst(p.lambda, s * p.mu, q).real();
    const double r = p.lambda * psi / (s * p.mu);
    const LowerPart lp = lower_part(i < s ? i : s, p, q);
    const auto& hit_s = lp.hit[static_cast<std::size_t>(s)];

    double below = 0.0, below_moment = 0.0;
    for (int n = 0; n <= s; ++n) {
        const double t = lp.w[static_cast<std::size_t>(n)] * hit_s[static_cast<std::size_t>(n)].real();
        below += t;
        below_moment += n * t;
    }
    const double z = below + r / (1.0 - r);

    // direct moment sum above s, cut after five consecutive negligible terms
    double above_moment = 0.0;
    double term_weight = 1.0;
    for (int k = s + 1, quiet = 0; quiet < 5; ++k) {
        term_weight *= r;
        const double term = k * term_weight;
        above_moment += term;
        quiet = term < 1e-16 * above_moment ? quiet + 1 : 0;
        if (k > s + 1000000) throw NumericalError("M/M/s moment sum did not converge");
    }

    MmsMeanReport rep;
    rep.reference_mean = (below_moment + above_moment) / z;
    const double p_le = below / z;
    const double p_ge = 1.0 / (1.0 - r) / z;
    const double loss_mean = below_moment / below;
    rep.decomposition = p_le * loss_mean + p_ge * mm1_mean(0, p.lambda, s * p.mu, q) + s * p_ge * r;
    if (std::abs(rep.decomposition - rep.reference_mean) > kMeanCheckTol * std::max(1.0, rep.reference_mean))
        throw NumericalError("M/M/s mean decomposition disagrees with the direct sum");

    if (i == s) {
        rep.mean = rep.reference_mean;
    } else if (i > s) {
        rep.mean = rep.reference_mean * std::pow(psi, i - s);
        for (int l = s + 1; l <= i; ++l)
            rep.mean += (l + r / (1.0 - r)) * (std::pow(psi, i - l) - std::pow(psi, i - l + 1));
    } else {
        rep.mean = rep.reference_mean * hit_s[static_cast<std::size_t>(i)].real();
        for (int j = i; j <= s - 1; ++j) {
            const auto& row = lp.hit[static_cast<std::size_t>(j)];
            const auto law = loss_law(j, row, lp.w);
            double m = 0.0;
            for (int n = 0; n <= j; ++n) m += n * law[static_cast<std::size_t>(n)].real();
            const double p_sup = (row[static_cast<std::size_t>(i)] - lp.hit[static_cast<std::size_t>(j + 1)][static_cast<std::size_t>(i)]).real();
            rep.mean += m * p_sup;
        }
    }
    return rep;
}

} // namespace tq
