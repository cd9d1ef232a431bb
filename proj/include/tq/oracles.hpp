#pragma once

#include <vector>

#include <Eigen/Dense>

#include "tq/model.hpp"
#include "tq/types.hpp"

namespace tq {

/// Law of a truncated CTMC at an independent exponential time: the row
/// q (qI - G)^{-1} of the resolvent. For complex q the entries are q times the
/// Laplace transforms of the transient probabilities.
struct ResolventPmf {
    int initial = 0;
    Complex q;
    int first_state = 0;
    std::vector<Complex> mass;
    /// Max entrywise change when the truncation is extended; 0 when the chain
    /// is finite (nothing to certify).
    double certificate = 0.0;

    int last_state() const { return first_state + static_cast<int>(mass.size()) - 1; }
    Complex at(int state) const;
    Complex total() const;
    std::vector<double> real() const;
};

/// Row `index` of q (qI - G)^{-1}. Direct sparse LU; throws NumericalError if
/// the relative residual exceeds 1e-12.
Eigen::VectorXcd resolvent_row(const SparseGenerator& g, int index, TransformArgument q);

ResolventPmf resolvent_pmf(const GeneratorMatrix& gen, int initial, TransformArgument q);

/// Resolvent pmf on `truncation`, re-solved with the top raised by `extension`
/// levels (and the floor lowered, when unreflected); TruncationError when the
/// two differ by more than `tol` anywhere.
ResolventPmf certified_resolvent_pmf(const MarkovPrpSpec& spec, StateRange truncation, int initial,
                                     TransformArgument q, double tol = 1e-9, int extension = 10);

ResolventPmf certified_resolvent_pmf(const BirthDeathSpec& spec, int initial, TransformArgument q,
                                     double tol = 1e-9, int extension = 10);

/// Joint law of (Q(e_q), inf_{u <= e_q} Q(u)) from a fixed initial level.
struct JointInfPmf {
    JointInfGenerator layout;
    std::vector<Complex> mass;  // aligned with layout.states
    Complex below_floor = 0.0;  // mass routed to the sink

    Complex at(int level, int infimum) const;
    /// P(inf = l) for l in [layout.range.lower, layout.initial]
    std::vector<Complex> infimum_law() const;
    /// P(Q = k) over [layout.range.lower, layout.range.upper]
    std::vector<Complex> level_law() const;
    /// P(Q = l + k | inf = l), k = 0 .. range.upper - l
    std::vector<Complex> conditional_on_infimum(int l) const;
    /// P(Q - inf = k), k = 0 .. range.upper - range.lower
    std::vector<Complex> excursion_law() const;
};

JointInfPmf joint_inf_resolvent(const MarkovPrpSpec& spec, int initial, TransformArgument q,
                                StateRange truncation);

/// E_m[e^{-q tau}] for m = k..top, tau the first time the level process is
/// strictly below k; upward moves past `top` are clamped onto it.
std::vector<Complex> first_passage_below(const MarkovPrpSpec& spec, int k, int top, TransformArgument q);

/// P(X(t) = .) by uniformization, Poisson tail cut below 1e-13.
std::vector<double> uniformization_pmf(const GeneratorMatrix& gen, int initial, double t);

} // namespace tq
