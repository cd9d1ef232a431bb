#include "tq/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SparseLU>

namespace tq {

namespace {

constexpr double kResidualTol = 1e-12;
constexpr double kPoissonTail = 1e-13;
constexpr double kMaxUniformizationMean = 1e7;

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> solve_resolvent_row(const SparseGenerator& g, int index, Scalar q) {
    using Mat = Eigen::SparseMatrix<Scalar, Eigen::ColMajor>;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const int n = static_cast<int>(g.rows());
    if (index < 0 || index >= n) throw InputError("resolvent: initial state outside the generator");

    Mat a = (-g.transpose()).template cast<Scalar>();
    for (int i = 0; i < n; ++i) a.coeffRef(i, i) += q;
    a.makeCompressed();

    Eigen::SparseLU<Mat> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw NumericalError("resolvent: singular system (q = 0 or malformed generator)");
    Vec rhs = Vec::Zero(n);
    rhs(index) = q;
    Vec y = lu.solve(rhs);
    if (lu.info() != Eigen::Success) throw NumericalError("resolvent: solve failed");
    const double residual = (a * y - rhs).template lpNorm<Eigen::Infinity>();
    if (!(residual <= kResidualTol * std::abs(q) * std::max(1.0, y.template lpNorm<Eigen::Infinity>())))
        throw NumericalError("resolvent: residual " + format_number(residual) + " above tolerance");
    return y;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> solve_sparse(Eigen::SparseMatrix<Scalar, Eigen::ColMajor>& a,
                                                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& rhs) {
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<Scalar, Eigen::ColMajor>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw NumericalError("singular first-passage system");
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x = lu.solve(rhs);
    const double residual = (a * x - rhs).template lpNorm<Eigen::Infinity>();
    if (!(residual <= kResidualTol * std::max(1.0, rhs.template lpNorm<Eigen::Infinity>())))
        throw NumericalError("first-passage solve residual above tolerance");
    return x;
}

template <typename Scalar>
std::vector<Complex> first_passage_impl(const MarkovPrpSpec& spec, int k, int top, Scalar q) {
    const int n = top - k + 1;
    std::vector<Eigen::Triplet<Scalar>> t;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rhs = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n);
    for (int m = k; m <= top; ++m) {
        const int row = m - k;
        Scalar diag = q;
        for (const auto& tr : spec.transitions(m)) {
            const int target = std::min(tr.target, top);
            if (target == m) continue;
            diag += tr.rate;
            if (target < k)
                rhs(row) += tr.rate;
            else
                t.emplace_back(row, target - k, Scalar(-tr.rate));
        }
        t.emplace_back(row, row, diag);
    }
    Eigen::SparseMatrix<Scalar, Eigen::ColMajor> a(n, n);
    a.setFromTriplets(t.begin(), t.end());
    const auto h = solve_sparse<Scalar>(a, rhs);
    std::vector<Complex> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = Complex(h(i));
    return out;
}

double max_difference(const ResolventPmf& a, const ResolventPmf& b) {
    const int lo = std::min(a.first_state, b.first_state);
    const int hi = std::max(a.last_state(), b.last_state());
    double worst = 0.0;
    for (int s = lo; s <= hi; ++s) worst = std::max(worst, std::abs(a.at(s) - b.at(s)));
    return worst;
}

} // namespace

Complex ResolventPmf::at(int state) const {
    if (state < first_state || state > last_state()) return 0.0;
    return mass[static_cast<std::size_t>(state - first_state)];
}

Complex ResolventPmf::total() const {
    Complex s = 0.0;
    for (const auto& m : mass) s += m;
    return s;
}

std::vector<double> ResolventPmf::real() const {
    std::vector<double> out;
    out.reserve(mass.size());
    for (const auto& m : mass) out.push_back(m.real());
    return out;
}

Eigen::VectorXcd resolvent_row(const SparseGenerator& g, int index, TransformArgument q) {
    if (q.is_real()) return solve_resolvent_row<double>(g, index, q.real()).cast<Complex>();
    return solve_resolvent_row<Complex>(g, index, q.value());
}

ResolventPmf resolvent_pmf(const GeneratorMatrix& gen, int initial, TransformArgument q) {
    const Eigen::VectorXcd row = resolvent_row(gen.rates, gen.index_of(initial), q);
    ResolventPmf out;
    out.initial = initial;
    out.q = q.value();
    out.first_state = gen.first_state;
    out.mass.assign(row.data(), row.data() + row.size());
    if (q.is_real())
        for (auto& m : out.mass) m = Complex(m.real(), 0.0);
    return out;
}

ResolventPmf certified_resolvent_pmf(const MarkovPrpSpec& spec, StateRange truncation, int initial,
                                     TransformArgument q, double tol, int extension) {
    ResolventPmf base = resolvent_pmf(build_level_generator(spec, truncation), initial, q);
    StateRange wider = truncation;
    wider.upper += extension;
    if (!spec.reflection_level) wider.lower -= extension;
    const ResolventPmf check = resolvent_pmf(build_level_generator(spec, wider), initial, q);
    base.certificate = max_difference(base, check);
    if (base.certificate > tol)
        throw TruncationError("resolvent pmf changes by " + format_number(base.certificate) +
                              " when the truncation is extended");
    return base;
}

ResolventPmf certified_resolvent_pmf(const BirthDeathSpec& spec, int initial, TransformArgument q,
                                     double tol, int extension) {
    ResolventPmf base = resolvent_pmf(build_birth_death_generator(spec), initial, q);
    if (spec.upper) return base;
    BirthDeathSpec wider = spec;
    wider.truncation += extension;
    const ResolventPmf check = resolvent_pmf(build_birth_death_generator(wider), initial, q);
    base.certificate = max_difference(base, check);
    if (base.certificate > tol)
        throw TruncationError("resolvent pmf changes by " + format_number(base.certificate) +
                              " when the truncation is extended");
    return base;
}

std::vector<Complex> first_passage_below(const MarkovPrpSpec& spec, int k, int top, TransformArgument q) {
    if (top < k) throw InputError("first_passage_below: threshold above the truncation top");
    if (q.is_real()) return first_passage_impl<double>(spec, k, top, q.real());
    return first_passage_impl<Complex>(spec, k, top, q.value());
}

// ---------------------------------------------------------------- joint infimum

Complex JointInfPmf::at(int level, int infimum) const {
    if (infimum < layout.range.lower || infimum > layout.initial || level < infimum || level > layout.range.upper)
        return 0.0;
    return mass[static_cast<std::size_t>(layout.index_of(level, infimum))];
}

std::vector<Complex> JointInfPmf::infimum_law() const {
    std::vector<Complex> out(static_cast<std::size_t>(layout.initial - layout.range.lower + 1), 0.0);
    for (std::size_t i = 0; i < layout.states.size(); ++i)
        out[static_cast<std::size_t>(layout.states[i].second - layout.range.lower)] += mass[i];
    return out;
}

std::vector<Complex> JointInfPmf::level_law() const {
    std::vector<Complex> out(static_cast<std::size_t>(layout.range.size()), 0.0);
    for (std::size_t i = 0; i < layout.states.size(); ++i)
        out[static_cast<std::size_t>(layout.states[i].first - layout.range.lower)] += mass[i];
    return out;
}

std::vector<Complex> JointInfPmf::conditional_on_infimum(int l) const {
    if (l < layout.range.lower || l > layout.initial) throw InputError("infimum level outside the joint chain");
    std::vector<Complex> out;
    Complex total = 0.0;
    for (int n = l; n <= layout.range.upper; ++n) {
        out.push_back(at(n, l));
        total += out.back();
    }
    if (std::abs(total) == 0.0) throw NumericalError("conditioning on an infimum of probability zero");
    for (auto& c : out) c /= total;
    return out;
}

std::vector<Complex> JointInfPmf::excursion_law() const {
    std::vector<Complex> out(static_cast<std::size_t>(layout.range.size()), 0.0);
    for (std::size_t i = 0; i < layout.states.size(); ++i)
        out[static_cast<std::size_t>(layout.states[i].first - layout.states[i].second)] += mass[i];
    return out;
}

JointInfPmf joint_inf_resolvent(const MarkovPrpSpec& spec, int initial, TransformArgument q,
                                StateRange truncation) {
    JointInfPmf out;
    out.layout = build_joint_inf_generator(spec, initial, truncation);
    const int start = out.layout.index_of(initial, initial);
    const Eigen::VectorXcd row = resolvent_row(out.layout.rates, start, q);
    out.mass.assign(row.data(), row.data() + out.layout.sink);
    out.below_floor = row(out.layout.sink);
    return out;
}

// ---------------------------------------------------------------- uniformization

std::vector<double> uniformization_pmf(const GeneratorMatrix& gen, int initial, double t) {
    if (!(t >= 0.0)) throw InputError("uniformization needs t >= 0");
    const int n = gen.size();
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v(gen.index_of(initial)) = 1.0;
    const double rate = gen.max_exit_rate();
    if (t == 0.0 || rate == 0.0) return {v.data(), v.data() + n};

    const double mean = rate * t;
    if (mean > kMaxUniformizationMean) throw NumericalError("uniformization: rate * t too large");
    // P = I + G / rate, applied to row vectors: v <- v + (G^T v) / rate
    const SparseGenerator gt = gen.rates.transpose();
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    double cumulative = 0.0;
    for (long k = 0;; ++k) {
        const double w = std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0));
        acc += w * v;
        cumulative += w;
        if (k > mean && 1.0 - cumulative < kPoissonTail) break;
        if (k > mean + 50.0 * std::sqrt(mean) + 100) break;
        v += (gt * v) / rate;
    }
    return {acc.data(), acc.data() + n};
}

} // namespace tq
