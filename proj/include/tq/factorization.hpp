#pragma once

#include <functional>
#include <vector>

#include "tq/model.hpp"
#include "tq/types.hpp"

namespace tq {

/// phi(m, k, q) = E_m[e^{-q tau}], tau the first time the level process is
/// strictly below k when started at m with fresh workloads. Must return 1
/// for m < k.
using HittingTimeLst = std::function<Complex(int m, int k, TransformArgument q)>;

/// M/M/1-type tails: phi(m, k) = psi(q)^{m - k + 1}.
HittingTimeLst mm1_hitting_lst(double lambda, double mu);

/// Skip-free chains: phi(m, k) = E_m[e^{-q tau_{k-1}}] by bd_hitting_lst.
HittingTimeLst birth_death_hitting_lst(BirthDeathSpec spec);

/// Any Markov spec: first-passage transforms from sparse solves on the
/// truncated level chain [k, truncation.upper] with the region below k
/// absorbing. Levels above the top are clamped onto it. Solutions are cached
/// per threshold for the most recent q; safe to share across threads.
HittingTimeLst resolvent_hitting_lst(const MarkovPrpSpec& spec, StateRange truncation);

/// P(Q(e_q) = l + k | inf_{u <= e_q} Q(u) = l), k = 0..k_max.
struct ConditionalPmf {
    int level = 0;
    std::vector<double> masses;
    /// Mass beyond k_max implied by the system (not included in masses).
    double tail = 0.0;

    int k_max() const { return static_cast<int>(masses.size()) - 1; }
};

/// Same system at complex q; entries are q times Laplace transforms in time
/// and still sum to one.
struct ConditionalTransform {
    int level = 0;
    std::vector<Complex> masses;
    Complex tail = 0.0;
};

/// Forward solution of the conditional-infimum linear system for the free
/// process: c_0 from the first tail equation and normalization, then each c_k
/// from the scalar relation between consecutive tails. Needs phi at
/// thresholds up to l + k_max + 1.
ConditionalPmf solve_conditional_pmf(const MarkovPrpSpec& spec, int l, TransformArgument q,
                                     const HittingTimeLst& phi, int k_max, double tail_tol = 1e-8);

ConditionalTransform solve_conditional_transform(const MarkovPrpSpec& spec, int l, TransformArgument q,
                                                 const HittingTimeLst& phi, int k_max,
                                                 double tail_tol = 1e-8);

/// Law of Q(e_q) from `initial`, assembled from conditional laws over the
/// value of the infimum: P(inf = l) = phi(initial, l + 1) - phi(initial, l).
/// With a reflection level L the infimum is at least L and the mass at L is
/// phi(initial, L + 1); without one, infima below truncation.lower are
/// dropped. Entry i is level truncation.lower (or L) + i.
std::vector<Complex> prp_pmf(const MarkovPrpSpec& spec, int initial, TransformArgument q,
                             StateRange truncation);

struct DeviationReport {
    double max_deviation = 0.0;
    /// Probability routed below the truncation floor by the oracle.
    double below_floor = 0.0;
};

struct TheoremOneReport : DeviationReport {
    std::vector<double> engine;     // solve_conditional_pmf
    std::vector<double> reflected;  // Q_l(e_q) from l, resolvent
    std::vector<double> joint;      // Q(e_q) - l given inf = l from n0, joint resolvent
};

/// Engine vs reflected-chain resolvent vs joint-infimum conditional resolvent.
/// phi defaults to resolvent_hitting_lst on the same truncation.
TheoremOneReport verify_theorem_1(const MarkovPrpSpec& spec, int l, int n0, TransformArgument q,
                                  StateRange truncation, const HittingTimeLst& phi = {});

/// Conditional law of Q given inf = l equals that of Q reflected at 0 given
/// inf = l (l >= 0), both from n0, both by joint-infimum resolvents.
DeviationReport verify_theorem_2(const MarkovPrpSpec& spec, int l, int n0, TransformArgument q,
                                 StateRange truncation);

/// |E_0 e^{iwQ} - E_0 e^{iw inf} E_0 e^{iw(Q - inf)}| maximized over omegas.
/// Requires state-independent rates and jump sizes on the truncation range.
DeviationReport verify_corollary_1(const MarkovPrpSpec& spec, TransformArgument q,
                                   const std::vector<double>& omegas, StateRange truncation);

/// |E_n0 e^{iwQ_0} - E_n0 e^{iw inf Q_0} E_0 e^{iwQ_0}| for the chain
/// reflected at 0 with state-independent rates above it.
DeviationReport verify_corollary_2(const MarkovPrpSpec& spec, int n0, TransformArgument q,
                                   const std::vector<double>& omegas, StateRange truncation);

} // namespace tq
