#pragma once

#include "tq/model.hpp"
#include "tq/types.hpp"

namespace tq {

/// Kummer's confluent hypergeometric function M(1, b, z) for Re(b) > 0 and
/// z <= 0. For |z| <= 50 the series is summed after Kummer's transformation
/// M(1, b, z) = e^z M(b - 1, b, -z), whose terms do not alternate; larger |z|
/// uses the integral q * int_0^inf exp(-(q t + rho (1 - e^{-t}))) dt with
/// q = b - 1, rho = -z (requires Re(b) > 1).
Complex kummer_m1(Complex b, double z);

/// Plain alternating series sum_n z^n / (b)_n. Only accurate for small |z|;
/// kept as an independent cross-check of kummer_m1.
Complex kummer_m1_direct_series(Complex b, double z);

/// LST psi(q) of the M/M/1 busy period (arrival rate lambda, service rate
/// mu): the root of lambda psi^2 - (lambda + mu + q) psi + mu = 0 with
/// |psi| <= 1. E_k[e^{-q tau_s}] = psi^{k - s} for k > s.
Complex mm1_busy_period_lst(double lambda, double mu, TransformArgument q);

/// (1 - psi(q)) / q computed without cancellation as q -> 0; tends to the
/// mean busy period 1 / (mu - lambda) when lambda < mu.
Complex mm1_busy_period_tail_transform(double lambda, double mu, TransformArgument q);

/// E_from[e^{-q tau_target}] for a birth-death chain, tau_target the first
/// visit to target. Downward passages run the continued-fraction recursion
/// from the truncation top; if the spec is unbounded, the result is bracketed
/// by re-running with the opposite boundary closure and a TruncationError is
/// raised when the bracket is wider than `tol`.
Complex bd_hitting_lst(const BirthDeathSpec& spec, int from, int target, TransformArgument q,
                       double tol = 1e-12);

} // namespace tq
