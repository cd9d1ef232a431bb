#include "tq/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "tq/errors.hpp"

namespace tq {

namespace {

constexpr double kPmfSumTolerance = 1e-9;
constexpr double kTailCut = 1e-12;

void check_rate(double r, const char* what) {
    if (!std::isfinite(r) || r < 0.0)
        throw InputError(std::string(what) + " must be finite and nonnegative");
}

std::vector<double> normalize_pmf(std::vector<double> pmf) {
    if (pmf.empty()) throw InputError("jump-size pmf is empty");
    for (double p : pmf) check_rate(p, "jump-size probability");
    const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
    if (std::abs(total - 1.0) > kPmfSumTolerance)
        throw InputError("jump-size pmf sums to " + format_number(total) + ", not 1");
    double cumulative = 0.0;
    std::size_t keep = pmf.size();
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        cumulative += pmf[i];
        if (cumulative >= 1.0 - kTailCut) {
            keep = i + 1;
            break;
        }
    }
    pmf.resize(keep);
    const double kept = std::accumulate(pmf.begin(), pmf.end(), 0.0);
    // leaves already-normalized input untouched, so reloading is a no-op
    if (std::abs(kept - 1.0) > 8.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(pmf.size()))
        for (double& p : pmf) p /= kept;
    return pmf;
}

template <typename T>
const T& clamped(const std::vector<T>& v, int start, int level) {
    const long idx = std::clamp<long>(static_cast<long>(level) - start, 0, static_cast<long>(v.size()) - 1);
    return v[static_cast<std::size_t>(idx)];
}

SparseGenerator assemble(int n, std::vector<Eigen::Triplet<double>>& off_diagonal) {
    std::vector<double> outflow(static_cast<std::size_t>(n), 0.0);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(off_diagonal.size() + static_cast<std::size_t>(n));
    for (const auto& t : off_diagonal) {
        if (t.row() == t.col() || t.value() == 0.0) continue;
        triplets.push_back(t);
        outflow[static_cast<std::size_t>(t.row())] += t.value();
    }
    for (int i = 0; i < n; ++i) triplets.emplace_back(i, i, -outflow[static_cast<std::size_t>(i)]);
    SparseGenerator g(n, n);
    g.setFromTriplets(triplets.begin(), triplets.end());
    g.makeCompressed();
    return g;
}

} // namespace

// ---------------------------------------------------------------- RateMap

RateMap RateMap::constant(double value) {
    check_rate(value, "rate");
    RateMap m;
    m.kind_ = Kind::Constant;
    m.value_ = value;
    return m;
}

RateMap RateMap::linear(double rate) {
    check_rate(rate, "rate");
    RateMap m;
    m.kind_ = Kind::Linear;
    m.value_ = rate;
    return m;
}

RateMap RateMap::linear_capped(double rate, int cap) {
    check_rate(rate, "rate");
    if (cap < 0) throw InputError("linear-capped rate map needs cap >= 0");
    RateMap m;
    m.kind_ = Kind::LinearCapped;
    m.value_ = rate;
    m.cap_ = cap;
    return m;
}

RateMap RateMap::table(int start, std::vector<double> values) {
    if (values.empty()) throw InputError("rate table is empty");
    for (double v : values) check_rate(v, "rate");
    RateMap m;
    m.kind_ = Kind::Table;
    m.start_ = start;
    m.values_ = std::move(values);
    return m;
}

double RateMap::operator()(int level) const {
    switch (kind_) {
    case Kind::Constant: return value_;
    case Kind::Linear: return value_ * std::max(level, 0);
    case Kind::LinearCapped: return value_ * std::min(std::max(level, 0), cap_);
    case Kind::Table: return clamped(values_, start_, level);
    }
    return 0.0;
}

bool RateMap::is_level_independent(int lower, int upper) const {
    const double first = (*this)(lower);
    for (int n = lower + 1; n <= upper; ++n)
        if ((*this)(n) != first) return false;
    return true;
}

// ---------------------------------------------------------------- JumpSizes

JumpSizes JumpSizes::fixed(std::vector<double> pmf) {
    JumpSizes s;
    s.pmfs_ = {normalize_pmf(std::move(pmf))};
    return s;
}

JumpSizes JumpSizes::per_level(int start, std::vector<std::vector<double>> pmfs) {
    if (pmfs.empty()) throw InputError("per-level jump sizes need at least one pmf");
    JumpSizes s;
    s.kind_ = Kind::PerLevel;
    s.start_ = start;
    s.pmfs_.clear();
    for (auto& p : pmfs) s.pmfs_.push_back(normalize_pmf(std::move(p)));
    return s;
}

JumpSizes JumpSizes::reset_to(int level) {
    JumpSizes s;
    s.kind_ = Kind::Reset;
    s.start_ = level;
    s.pmfs_.clear();
    return s;
}

std::vector<std::pair<int, double>> JumpSizes::at(int level) const {
    std::vector<std::pair<int, double>> out;
    if (kind_ == Kind::Reset) {
        if (level > start_) out.emplace_back(level - start_, 1.0);
        return out;
    }
    const auto& pmf = kind_ == Kind::Fixed ? pmfs_.front() : clamped(pmfs_, start_, level);
    for (std::size_t i = 0; i < pmf.size(); ++i)
        if (pmf[i] > 0.0) out.emplace_back(static_cast<int>(i) + 1, pmf[i]);
    return out;
}

bool JumpSizes::is_level_independent(int lower, int upper) const {
    if (kind_ == Kind::Fixed) return true;
    if (kind_ == Kind::Reset) return false;
    const auto& first = clamped(pmfs_, start_, lower);
    for (int n = lower + 1; n <= upper; ++n)
        if (clamped(pmfs_, start_, n) != first) return false;
    return true;
}

// ---------------------------------------------------------------- MarkovPrpSpec

void MarkovPrpSpec::validate() const {
    if (batch_sizes.kind() == JumpSizes::Kind::Reset)
        throw InputError("batch sizes cannot use the reset form");
}

std::vector<Transition> MarkovPrpSpec::transitions(int level) const {
    std::vector<Transition> out;
    const bool at_floor = reflection_level && level <= *reflection_level;
    auto land = [&](int target) {
        return reflection_level ? std::max(target, *reflection_level) : target;
    };

    if (const double r = single_arrival(level); r > 0.0) out.push_back({level + 1, r});
    if (const double r = batch_rate(level); r > 0.0)
        for (auto [size, p] : batch_sizes.at(level)) out.push_back({level + size, r * p});
    if (!at_floor) {
        if (const double r = service(level); r > 0.0) out.push_back({land(level - 1), r});
        if (const double r = catastrophe_rate(level); r > 0.0)
            for (auto [size, p] : catastrophe_sizes.at(level)) out.push_back({land(level - size), r * p});
    }
    return out;
}

double MarkovPrpSpec::total_rate(int level) const {
    double total = 0.0;
    for (const auto& t : transitions(level))
        if (t.target != level) total += t.rate;
    return total;
}

bool MarkovPrpSpec::is_level_independent(int lower, int upper) const {
    return single_arrival.is_level_independent(lower, upper) &&
           batch_rate.is_level_independent(lower, upper) &&
           batch_sizes.is_level_independent(lower, upper) &&
           service.is_level_independent(lower, upper) &&
           catastrophe_rate.is_level_independent(lower, upper) &&
           catastrophe_sizes.is_level_independent(lower, upper);
}

MarkovPrpSpec MarkovPrpSpec::unreflected() const {
    MarkovPrpSpec s = *this;
    s.reflection_level.reset();
    return s;
}

MarkovPrpSpec MarkovPrpSpec::reflected_at(int level) const {
    MarkovPrpSpec s = *this;
    s.reflection_level = level;
    return s;
}

// ---------------------------------------------------------------- BirthDeathSpec

double BirthDeathSpec::birth_at(int n) const {
    if (n < lower || n >= top()) return 0.0;
    return birth(n);
}

double BirthDeathSpec::death_at(int n) const {
    if (n <= lower || n > top()) return 0.0;
    return death(n);
}

void BirthDeathSpec::validate() const {
    if (top() <= lower) throw InputError("birth-death state range is empty");
    for (int n = lower; n <= top(); ++n) {
        check_rate(birth(n), "birth rate");
        check_rate(death(n), "death rate");
    }
}

MarkovPrpSpec BirthDeathSpec::as_prp() const {
    MarkovPrpSpec s;
    std::vector<double> up, down;
    for (int n = lower; n <= top(); ++n) {
        up.push_back(birth_at(n));
        down.push_back(death_at(n));
    }
    s.single_arrival = RateMap::table(lower, std::move(up));
    s.service = RateMap::table(lower, std::move(down));
    s.batch_rate = RateMap::constant(0.0);
    s.catastrophe_rate = RateMap::constant(0.0);
    s.reflection_level = lower;
    return s;
}

// ---------------------------------------------------------------- generators

int GeneratorMatrix::index_of(int state) const {
    if (state < first_state || state > last_state())
        throw InputError("state " + std::to_string(state) + " outside the truncated range");
    return state - first_state;
}

double GeneratorMatrix::max_row_sum() const {
    double worst = 0.0;
    for (int i = 0; i < rates.outerSize(); ++i) {
        double s = 0.0;
        for (SparseGenerator::InnerIterator it(rates, i); it; ++it) s += it.value();
        worst = std::max(worst, std::abs(s));
    }
    return worst;
}

double GeneratorMatrix::max_exit_rate() const {
    double worst = 0.0;
    for (int i = 0; i < size(); ++i) worst = std::max(worst, -rates.coeff(i, i));
    return worst;
}

int JointInfGenerator::index_of(int level, int infimum) const {
    // states are laid out infimum-major: for each m in [range.lower, initial],
    // levels m..range.upper
    if (infimum < range.lower || infimum > initial || level < infimum || level > range.upper)
        throw InputError("(level, infimum) pair outside the joint state space");
    int idx = 0;
    for (int m = range.lower; m < infimum; ++m) idx += range.upper - m + 1;
    return idx + (level - infimum);
}

GeneratorMatrix build_level_generator(const MarkovPrpSpec& spec, StateRange truncation) {
    spec.validate();
    StateRange range = truncation;
    if (spec.reflection_level) {
        if (truncation.lower > *spec.reflection_level)
            throw InputError("truncation floor lies above the reflection level");
        range.lower = *spec.reflection_level;
    }
    if (range.upper < range.lower) throw InputError("empty truncation range");

    std::vector<Eigen::Triplet<double>> t;
    for (int n = range.lower; n <= range.upper; ++n) {
        for (const auto& tr : spec.transitions(n)) {
            const int target = std::clamp(tr.target, range.lower, range.upper);
            t.emplace_back(n - range.lower, target - range.lower, tr.rate);
        }
    }
    return GeneratorMatrix{range.lower, assemble(range.size(), t)};
}

GeneratorMatrix build_birth_death_generator(const BirthDeathSpec& spec) {
    spec.validate();
    const StateRange range{spec.lower, spec.top()};
    std::vector<Eigen::Triplet<double>> t;
    for (int n = range.lower; n <= range.upper; ++n) {
        const int i = n - range.lower;
        if (const double b = spec.birth_at(n); b > 0.0) t.emplace_back(i, i + 1, b);
        if (const double d = spec.death_at(n); d > 0.0) t.emplace_back(i, i - 1, d);
    }
    return GeneratorMatrix{range.lower, assemble(range.size(), t)};
}

JointInfGenerator build_joint_inf_generator(const MarkovPrpSpec& spec, int initial,
                                            StateRange truncation) {
    spec.validate();
    JointInfGenerator g;
    g.range = truncation;
    if (spec.reflection_level) {
        if (truncation.lower > *spec.reflection_level)
            throw InputError("truncation floor lies above the reflection level");
        g.range.lower = *spec.reflection_level;
    }
    if (!g.range.contains(initial)) throw InputError("initial level outside the truncation range");
    g.initial = initial;

    for (int m = g.range.lower; m <= initial; ++m)
        for (int n = m; n <= g.range.upper; ++n) g.states.emplace_back(n, m);
    g.sink = static_cast<int>(g.states.size());

    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t idx = 0; idx < g.states.size(); ++idx) {
        const auto [n, m] = g.states[idx];
        for (const auto& tr : spec.transitions(n)) {
            const int target = std::min(tr.target, g.range.upper);
            const int row = static_cast<int>(idx);
            if (target < g.range.lower) {
                t.emplace_back(row, g.sink, tr.rate);
                continue;
            }
            t.emplace_back(row, g.index_of(target, std::min(m, target)), tr.rate);
        }
    }
    g.rates = assemble(g.sink + 1, t);
    return g;
}

} // namespace tq
