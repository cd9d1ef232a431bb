#pragma once

#include <optional>
#include <vector>

#include "tq/model.hpp"
#include "tq/types.hpp"

namespace tq {

/// M/M/s (or M/M/s/K when capacity is set): arrivals at rate lambda, each of
/// s servers completes at rate mu.
struct MmsParams {
    double lambda = 1.0;
    double mu = 1.0;
    int s = 1;
    std::optional<int> capacity;

    double rho() const { return lambda / mu; }
    void validate() const;

    /// Birth-death form of the queue; unbounded chains are cut at `truncation`.
    BirthDeathSpec as_birth_death(int truncation = 200) const;

    bool operator==(const MmsParams&) const = default;
};

/// P_k(Q(e_q) = s) for the M/M/inf queue with the same lambda and mu, from
/// the binomial-Poisson double sum with Kummer functions, 0 <= k <= s.
/// Summed with compensation; NumericalError when the estimated cancellation
/// error exceeds 1e-10 or the result leaves [0, 1].
Complex mminfty_point_pmf(int k, int s, const MmsParams& p, TransformArgument q);

enum class HittingMethod { ClosedForm, Recursion };

/// E_k[e^{-q tau_s}] for the upward passage k -> s of the M/M/inf queue, as
/// the ratio of two point pmfs. For rho > 30, s > 40, or whenever the point
/// sums lose too much to cancellation, the tridiagonal recursion is used
/// instead; `method` reports which route produced the value.
Complex mminfty_hitting_lst(int k, int s, const MmsParams& p, TransformArgument q,
                            HittingMethod* method = nullptr);

/// E_j[e^{-q tau_l}] for j = 0..l, one closed-form normalizer shared by all j.
std::vector<Complex> mminfty_hitting_row(int l, const MmsParams& p, TransformArgument q);

/// P_k(Q(e_q) = n) for any birth-death chain from reversibility with the
/// initial state as reference point: pi_n E_n[e^{-q tau_k}] normalized, all
/// transforms from bd_hitting_lst. Entry i is state spec.lower + i.
std::vector<Complex> reversible_pmf(const BirthDeathSpec& spec, int k, TransformArgument q);

/// P_k(Q(e_q) = n) for the M/M/s queue, reference point s.
Complex mms_pmf(int k, int n, const MmsParams& p, TransformArgument q);

/// P_k(Q(e_q) = n) for n = 0..n_max.
std::vector<Complex> mms_pmf_row(int k, int n_max, const MmsParams& p, TransformArgument q);

/// P_k(Q(e_q) = n) for the M/M/s/K queue, reference point s; requires s < K.
Complex mmsk_pmf(int k, int n, const MmsParams& p, TransformArgument q);

std::vector<Complex> mmsk_pmf_row(int k, const MmsParams& p, TransformArgument q);

/// E[Q(e_q) | Q(0) = n0] for the M/M/1 queue, lambda < mu.
double mm1_mean(int n0, double lambda, double mu, TransformArgument q);

/// Both sides of the split of E_s[Q(e_q)] into loss-system and M/M/1 parts.
struct MmsMeanReport {
    double mean = 0.0;           // E_i[Q(e_q)]
    double reference_mean = 0.0; // E_s[Q(e_q)] by direct summation
    double decomposition = 0.0;  // E_s[Q(e_q)] from the M/M/s/s + M/M/1 split
};

/// E[Q(e_q) | Q(0) = i] for the M/M/s queue, lambda < s mu. NumericalError
/// if the two evaluations of E_s[Q(e_q)] differ by more than 1e-7.
MmsMeanReport mms_mean(int i, const MmsParams& p, TransformArgument q);

} // namespace tq
