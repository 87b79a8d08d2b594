#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "chafee/spectral.hpp"

namespace chafee {

struct IntegrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelParams {
    double lambda = 20.0;     // reaction strength, bistable for lambda > pi^2
    int n_modes = 32;         // Galerkin truncation N
    double dt = 1e-3;         // base macro time step
    double t_max = 200.0;     // default horizon for relaxation-type queries
    int grid_points = 128;    // collocation points M, needs M >= 3N for exact cubics

    // Returns human-readable problems; empty means usable.
    std::vector<std::string> validate() const;
};

// Semidiscrete Chafee-Infante dynamics
//   da_k/dt = -(k pi)^2 a_k + P_k[ lambda (u - u^3) ]
// integrated by a first-order exponential integrator on the stiff linear
// part (exact heat decay, explicit reaction through phi_1 weights).  A
// second-order two-stage variant backs tight-tolerance reference runs.
//
// Instances carry scratch buffers; copy per thread instead of sharing.
class Dynamics {
public:
    explicit Dynamics(ModelParams p);

    const ModelParams& params() const { return p_; }
    const SineBasis& basis() const { return basis_; }

    static double reaction(double z, double lambda) {
        return -lambda * (z * z * z - z);
    }

    // Heat semigroup alone: a_k -> exp(-(k pi)^2 t) a_k.
    SpectralField semigroup(const SpectralField& x, double t) const;

    // Projected reaction term P[ lambda (u - u^3) ].
    void nonlinearity(const SpectralField& x, SpectralField& out) const;
    SpectralField nonlinearity(const SpectralField& x) const;

    // One base-dt step in place.  Throws IntegrationError on blow-up.
    void step(SpectralField& x) const;
    void step(SpectralField& x, double dt) const;

    // One macro step of length dt that stays stable for large states:
    // while the amplitude exceeds the explicit-reaction stability range
    // the step is split into substeps bounded by 1/(lambda |u|^2).
    // sup_hint is the caller's estimate of |u|_inf before the step
    // (<= 0 forces a fresh evaluation); large kicks decay back into the
    // plain-step regime within a handful of substeps.
    void step_stabilized(SpectralField& x, double dt, double sup_hint = 0.0) const;

    void flow_inplace(SpectralField& x, double t) const;
    SpectralField flow(const SpectralField& x, double t) const;

    // Second-order stepper with caller-chosen dt, for reference solutions.
    SpectralField flow_refined(const SpectralField& x, double t, double dt) const;

    // E(u) = int 1/2 u'^2 + lambda (u^4/4 - u^2/2); decreases along the flow.
    double energy(const SpectralField& x) const;

    double linear_rate(int k) const { return lin_[k]; }

    // Grid samples of the state passed to the most recent step call,
    // a free byproduct of the reaction evaluation.
    const std::vector<double>& last_eval() const { return grid_; }

private:
    struct StepFactors {
        double dt = -1.0;
        std::vector<double> decay;  // exp(-lam_k dt)
        std::vector<double> f1;     // dt phi_1(-lam_k dt)
        std::vector<double> f2;     // dt phi_2(-lam_k dt)
    };

    void make_factors(double dt, StepFactors& f) const;
    void step_with(SpectralField& x, const StepFactors& f) const;
    void step2_with(SpectralField& x, const StepFactors& f) const;
    void check_finite(const SpectralField& x) const;

    ModelParams p_;
    SineBasis basis_;
    std::vector<double> lin_;  // (k pi)^2
    StepFactors base_;
    mutable StepFactors custom_;
    mutable std::vector<double> grid_, fgrid_;
    mutable SpectralField fa_, stage_, fs_;
};

}  // namespace chafee
