#pragma once

#include <optional>
#include <vector>

#include "chafee/dynamics.hpp"

namespace chafee {

struct NewtonResult {
    SpectralField x;
    double residual = 0.0;  // H-norm of the stationary defect
    int iterations = 0;
    bool converged = false;
};

// Newton iteration on G(a) = -D a + lambda P[u - u^3] with the exact
// collocation Jacobian.  tol is measured on ||G|| in the H norm.
NewtonResult newton_equilibrium(const Dynamics& dyn, const SpectralField& seed,
                                double tol = 1e-10, int max_iter = 50);

struct EquilibriumSet {
    SpectralField phi_plus;   // positive stable state, mirror of phi_minus
    SpectralField phi_minus;
    SpectralField zero;
    std::vector<NewtonResult> all;  // deduplicated converged states
};

// Seeds the solver from 0 and +-c e_1 amplitudes; below the second
// bifurcation (lambda < 4 pi^2) exactly three states survive.
EquilibriumSet find_equilibria(const Dynamics& dyn, double tol = 1e-10);

// H-norm of the stationary defect -D a + lambda P[u - u^3] at x.
double equilibrium_residual(const Dynamics& dyn, const SpectralField& x);

// Time for flow(x) to enter the sup ball of radius tol around target,
// capped at t_cap; nullopt if never reached.
std::optional<double> time_to_reach(const Dynamics& dyn, const SpectralField& x,
                                    const SpectralField& target, double tol,
                                    double t_cap);

struct RelaxationFit {
    double t_rec = 0.0;   // offset of t(eps) ~ t_rec + kappa * gamma |ln eps|
    double kappa = 0.0;
    std::vector<double> eps;
    std::vector<double> t;  // worst-case settle time per eps
};

// Measures worst-case time to pull representative basin states into the
// sup ball of radius eps^{2 gamma}/2 around phi and fits the expected
// affine-in-|ln eps| shape.
RelaxationFit fit_relaxation(const Dynamics& dyn, const SpectralField& phi,
                             double gamma, const std::vector<double>& eps_grid);

}  // namespace chafee
