#pragma once

#include <functional>

#include "tq/types.hpp"

namespace tq {

/// Regulated Brownian motion with drift -1 and unit variance, started at x0
/// and observed at an independent exponential time e_q.
struct RbmQuery {
    double x0 = 0.0;
    double q = 1.0;

    RbmQuery(double x0, double q);

    double root() const;   // sqrt(1 + 2q)
    double alpha() const;  // root - 1
    double beta() const;   // root + 1
};

/// Atom at zero plus a density on (0, inf).
struct RbmTransientLaw {
    double atom = 0.0;
    std::function<double(double)> density;
    /// Density vanishes beyond this point (infinity when unbounded).
    double support_end = 0.0;
};

/// E_x[e^{-q tau_0}] = e^{-alpha(q) x}; complex q allowed.
Complex rbm_hitting_lst(double x, TransformArgument q);

/// Law of inf_{u <= e_q} R(u) from x0: atom e^{-alpha x0} at zero, density
/// alpha e^{-alpha (x0 - z)} on (0, x0).
RbmTransientLaw rbm_infimum_law(const RbmQuery& query);

/// Density of R(e_q) from x0. At x = x0 both branches are evaluated and must
/// agree within 1e-9 (NumericalError otherwise).
double rbm_density(double x, const RbmQuery& query);

/// The x < x0 branch written as the sum of its four exponential pieces
/// before simplification.
double rbm_density_lower_expanded(double x, const RbmQuery& query);

/// P_x0(R(e_q) > x).
double rbm_survival(double x, const RbmQuery& query);

RbmTransientLaw rbm_transient_law(const RbmQuery& query);

/// q times the Laplace transforms in time of the density and survival
/// function at complex q (same closed forms, principal square root).
Complex rbm_density_transform(double x, double x0, TransformArgument q);
Complex rbm_survival_transform(double x, double x0, TransformArgument q);

} // namespace tq
