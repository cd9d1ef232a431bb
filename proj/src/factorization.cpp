#include "tq/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "tq/oracles.hpp"
#include "tq/transforms.hpp"

namespace tq {

namespace {

constexpr double kNegativeMassTol = 1e-12;

class FirstPassageCache {
public:
    FirstPassageCache(MarkovPrpSpec spec, StateRange range) : spec_(std::move(spec)), range_(range) {}

    Complex operator()(int m, int k, TransformArgument q) {
        if (m < k) return 1.0;
        if (spec_.reflection_level && k <= *spec_.reflection_level) return 0.0;
        if (k > range_.upper)
            throw InputError("first-passage threshold " + std::to_string(k) + " above the truncation top");
        m = std::min(m, range_.upper);
        std::lock_guard lock(mutex_);
        if (!has_q_ || q_ != q.value()) {
            table_.clear();
            q_ = q.value();
            has_q_ = true;
        }
        auto it = table_.find(k);
        if (it == table_.end()) it = table_.emplace(k, first_passage_below(spec_, k, range_.upper, q)).first;
        return it->second[static_cast<std::size_t>(m - k)];
    }

private:
    MarkovPrpSpec spec_;
    StateRange range_;
    std::mutex mutex_;
    bool has_q_ = false;
    Complex q_;
    std::map<int, std::vector<Complex>> table_;
};

// Coefficients of the tail equations for one conditioning level l:
//   tail(k) = a(k) c_{k-1} + sum_{j<k} b(k, j) c_j
class TailSystem {
public:
    TailSystem(const MarkovPrpSpec& spec, int l, TransformArgument q, const HittingTimeLst& phi)
        : spec_(spec), l_(l), q_(q), phi_(phi) {}

    Complex phi(int m, int k) const {
        const auto key = std::make_pair(m, k);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        const Complex v = phi_(m + l_, k + l_, q_);
        memo_.emplace(key, v);
        return v;
    }

    // single arrival from k-1 stays at or above k
    Complex a(int k) const { return spec_.single_arrival(k - 1 + l_) * (1.0 - phi(k, k)) / q_.value(); }

    // batch from j lands at or above k and stays there
    Complex b(int k, int j) const {
        const double rate = spec_.batch_rate(j + l_);
        if (rate == 0.0) return 0.0;
        Complex sum = 0.0;
        for (auto [size, p] : spec_.batch_sizes.at(j + l_)) {
            const int m = j + size;
            if (m >= k) sum += p * (1.0 - phi(m, k));
        }
        return rate * sum / q_.value();
    }

    // b(k, j) - b(k + 1, j), assembled from nonnegative pieces
    Complex b_drop(int k, int j) const {
        const double rate = spec_.batch_rate(j + l_);
        if (rate == 0.0) return 0.0;
        Complex sum = 0.0;
        for (auto [size, p] : spec_.batch_sizes.at(j + l_)) {
            const int m = j + size;
            if (m == k) sum += p * (1.0 - phi(k, k));
            else if (m > k) sum += p * (phi(m, k + 1) - phi(m, k));
        }
        return rate * sum / q_.value();
    }

private:
    const MarkovPrpSpec& spec_;
    int l_;
    TransformArgument q_;
    const HittingTimeLst& phi_;
    mutable std::map<std::pair<int, int>, Complex> memo_;
};

ConditionalTransform solve_system(const MarkovPrpSpec& spec, int l, TransformArgument q, const HittingTimeLst& phi,
                                  int k_max) {
    if (spec.reflection_level) throw InputError("the conditional system describes the unreflected process");
    if (k_max < 0) throw InputError("k_max must be nonnegative");
    if (!phi) throw InputError("no hitting-time transform supplied");
    spec.validate();

    const TailSystem sys(spec, l, q, phi);
    const bool real = q.is_real();
    std::vector<Complex> c;
    c.reserve(static_cast<std::size_t>(k_max) + 1);
    for (int k = 0; k <= k_max; ++k) {
        Complex numerator = k == 0 ? Complex(1.0) : sys.a(k) * c.back();
        for (int j = 0; j < k; ++j) numerator += sys.b_drop(k, j) * c[static_cast<std::size_t>(j)];
        Complex ck = numerator / (1.0 + sys.a(k + 1) + sys.b(k + 1, k));
        if (real) {
            if (ck.real() < -kNegativeMassTol)
                throw NumericalError("negative conditional mass at k = " + std::to_string(k) +
                                     " (inconsistent hitting transforms or truncation)");
            ck = Complex(std::max(ck.real(), 0.0), 0.0);
        }
        c.push_back(ck);
    }
    Complex tail = sys.a(k_max + 1) * c.back();
    for (int j = 0; j <= k_max; ++j) tail += sys.b(k_max + 1, j) * c[static_cast<std::size_t>(j)];
    return ConditionalTransform{l, std::move(c), tail};
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    const std::size_t n = std::max(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        const double x = i < a.size() ? a[i] : 0.0;
        const double y = i < b.size() ? b[i] : 0.0;
        worst = std::max(worst, std::abs(x - y));
    }
    return worst;
}

std::vector<double> real_parts(const std::vector<Complex>& v) {
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& z : v) out.push_back(z.real());
    return out;
}

template <typename Law>
Complex characteristic(const Law& law, int first_level, double omega) {
    Complex sum = 0.0;
    for (std::size_t i = 0; i < law.size(); ++i)
        sum += law[i] * std::exp(Complex(0.0, omega * (first_level + static_cast<double>(i))));
    return sum;
}

} // namespace

HittingTimeLst mm1_hitting_lst(double lambda, double mu) {
    return [lambda, mu](int m, int k, TransformArgument q) -> Complex {
        if (m < k) return 1.0;
        return std::pow(mm1_busy_period_lst(lambda, mu, q), m - k + 1);
    };
}

HittingTimeLst birth_death_hitting_lst(BirthDeathSpec spec) {
    return [spec = std::move(spec)](int m, int k, TransformArgument q) -> Complex {
        if (m < k) return 1.0;
        if (k - 1 < spec.lower) return 0.0;
        return bd_hitting_lst(spec, m, k - 1, q);
    };
}

HittingTimeLst resolvent_hitting_lst(const MarkovPrpSpec& spec, StateRange truncation) {
    auto cache = std::make_shared<FirstPassageCache>(spec, truncation);
    return [cache](int m, int k, TransformArgument q) { return (*cache)(m, k, q); };
}

ConditionalPmf solve_conditional_pmf(const MarkovPrpSpec& spec, int l, TransformArgument q,
                                     const HittingTimeLst& phi, int k_max, double tail_tol) {
    if (!q.is_real()) throw InputError("solve_conditional_pmf needs real q; use solve_conditional_transform");
    const ConditionalTransform t = solve_system(spec, l, q, phi, k_max);
    ConditionalPmf out{l, real_parts(t.masses), t.tail.real()};
    if (out.tail > tail_tol)
        throw TruncationError("conditional pmf tail mass " + format_number(out.tail) + " beyond k_max = " +
                              std::to_string(k_max));
    return out;
}

ConditionalTransform solve_conditional_transform(const MarkovPrpSpec& spec, int l, TransformArgument q,
                                                 const HittingTimeLst& phi, int k_max, double tail_tol) {
    ConditionalTransform t = solve_system(spec, l, q, phi, k_max);
    if (std::abs(t.tail) > tail_tol)
        throw TruncationError("conditional transform tail " + format_number(std::abs(t.tail)) + " beyond k_max");
    return t;
}

std::vector<Complex> prp_pmf(const MarkovPrpSpec& spec, int initial, TransformArgument q, StateRange truncation) {
    const int floor = spec.reflection_level ? *spec.reflection_level : truncation.lower;
    if (initial < floor || initial > truncation.upper) throw InputError("initial level outside the truncation range");
    const MarkovPrpSpec free = spec.unreflected();
    const HittingTimeLst phi = resolvent_hitting_lst(spec, truncation);
    std::vector<Complex> out(static_cast<std::size_t>(truncation.upper - floor + 1), 0.0);

    for (int l = floor; l <= initial; ++l) {
        Complex weight = phi(initial, l + 1, q);
        if (!(spec.reflection_level && l == floor)) weight -= phi(initial, l, q);
        // the reflected level and levels above it share the free system
        const int k_max = truncation.upper - l - 1;
        if (k_max < 0) continue;
        const ConditionalTransform c = solve_system(free, l, q, phi, k_max);
        for (int k = 0; k <= k_max; ++k) out[static_cast<std::size_t>(l + k - floor)] += weight * c.masses[static_cast<std::size_t>(k)];
    }
    return out;
}

TheoremOneReport verify_theorem_1(const MarkovPrpSpec& spec, int l, int n0, TransformArgument q,
                                  StateRange truncation, const HittingTimeLst& phi) {
    if (n0 < l) throw InputError("the conditional-law check needs l <= n0");
    const MarkovPrpSpec free = spec.unreflected();
    const StateRange range{l, truncation.upper};
    const HittingTimeLst passage = phi ? phi : resolvent_hitting_lst(free, range);

    TheoremOneReport r;
    const int k_max = range.upper - l - 1;
    r.engine = solve_conditional_pmf(free, l, q, passage, k_max).masses;

    const ResolventPmf reflected = resolvent_pmf(build_level_generator(free.reflected_at(l), range), l, q);
    for (int k = 0; k <= k_max; ++k) r.reflected.push_back(reflected.at(l + k).real());

    const JointInfPmf joint = joint_inf_resolvent(free, n0, q, range);
    r.joint = real_parts(joint.conditional_on_infimum(l));
    r.joint.resize(static_cast<std::size_t>(k_max) + 1);
    r.below_floor = joint.below_floor.real();

    r.max_deviation = std::max({max_abs_diff(r.engine, r.reflected), max_abs_diff(r.engine, r.joint),
                                max_abs_diff(r.reflected, r.joint)});
    return r;
}

DeviationReport verify_theorem_2(const MarkovPrpSpec& spec, int l, int n0, TransformArgument q,
                                 StateRange truncation) {
    if (l < 0 || l > n0) throw InputError("the reflection check needs 0 <= l <= n0");
    const MarkovPrpSpec free = spec.unreflected();
    const JointInfPmf a = joint_inf_resolvent(free, n0, q, StateRange{l, truncation.upper});
    const JointInfPmf b = joint_inf_resolvent(free.reflected_at(0), n0, q, StateRange{0, truncation.upper});
    DeviationReport r;
    r.max_deviation = max_abs_diff(real_parts(a.conditional_on_infimum(l)), real_parts(b.conditional_on_infimum(l)));
    r.below_floor = a.below_floor.real();
    return r;
}

DeviationReport verify_corollary_1(const MarkovPrpSpec& spec, TransformArgument q, const std::vector<double>& omegas,
                                   StateRange truncation) {
    if (spec.reflection_level) throw InputError("wiener-hopf check needs the unreflected process");
    if (!spec.is_level_independent(truncation.lower, truncation.upper))
        throw InputError("wiener-hopf factorization needs state-independent rates and jump sizes");
    if (!truncation.contains(0)) throw InputError("truncation must contain the initial level 0");
    const JointInfPmf joint = joint_inf_resolvent(spec, 0, q, truncation);
    const auto level = joint.level_law();
    const auto inf = joint.infimum_law();
    const auto excursion = joint.excursion_law();

    DeviationReport r;
    r.below_floor = joint.below_floor.real();
    for (double w : omegas) {
        const Complex lhs = characteristic(level, truncation.lower, w);
        const Complex rhs = characteristic(inf, truncation.lower, w) * characteristic(excursion, 0, w);
        r.max_deviation = std::max(r.max_deviation, std::abs(lhs - rhs));
    }
    return r;
}

DeviationReport verify_corollary_2(const MarkovPrpSpec& spec, int n0, TransformArgument q,
                                   const std::vector<double>& omegas, StateRange truncation) {
    if (!spec.reflection_level || *spec.reflection_level != 0)
        throw InputError("reflected factorization needs reflection at level 0");
    if (n0 < 0 || n0 > truncation.upper) throw InputError("initial level outside the truncation range");
    if (!spec.is_level_independent(0, truncation.upper))
        throw InputError("reflected factorization needs state-independent rates and jump sizes");
    const StateRange range{0, truncation.upper};
    const JointInfPmf joint = joint_inf_resolvent(spec, n0, q, range);
    const ResolventPmf from_zero = resolvent_pmf(build_level_generator(spec, range), 0, q);

    DeviationReport r;
    for (double w : omegas) {
        const Complex lhs = characteristic(joint.level_law(), 0, w);
        const Complex rhs = characteristic(joint.infimum_law(), 0, w) * characteristic(from_zero.mass, 0, w);
        r.max_deviation = std::max(r.max_deviation, std::abs(lhs - rhs));
    }
    return r;
}

} // namespace tq
