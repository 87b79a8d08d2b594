#pragma once

#include <string>
#include <vector>

#include "chafee/rng.hpp"
#include "chafee/spectral.hpp"

namespace chafee {

// Finitely supported angular measure: jumps arrive along fixed unit-H
// profiles v_i with radial law nu(dr) = w_i alpha r^{-alpha-1} dr.
// Directions must come in +/- pairs with equal weight so the small-jump
// part is a martingale without a compensator.
struct NoiseSpec {
    double alpha = 1.5;          // regular-variation index in (0,2)
    double r_min = 1e-3;         // lower truncation for simulated small jumps
    struct Direction {
        SpectralField v;
        double weight = 0.0;
        double v_sup = 0.0;      // cached |v|_inf on the grid
    };
    std::vector<Direction> dirs;

    double total_weight() const;
    std::vector<std::string> validate(const SineBasis& basis) const;
};

// +-e1/pi with weight 1/2 each.
NoiseSpec make_first_mode_noise(double alpha, const SineBasis& basis,
                                double r_min = 1e-3);
// +-phi/||phi|| with weight 1/2 each.
NoiseSpec make_equilibrium_noise(double alpha, const SpectralField& phi,
                                 const SineBasis& basis, double r_min = 1e-3);

struct ScalingParams {
    double rho = 0.75;     // large/small split at radius eps^-rho
    double gamma = 0.9;    // reduced-domain margin exponent
    double theta = 0.1;    // auxiliary exponent in the admissibility chain
    double big_gamma = 1.0;  // nonlinearity growth constant in the gamma bound
};

// Admissibility windows for (theta, rho, gamma).  Violations are reported
// as warnings: the windows guarantee the eps -> 0 regime, and desk-scale
// runs deliberately sit outside them.
struct HypothesisReport {
    bool ok = true;
    double theta_hi = 0.0;
    double rho_lo = 0.0, rho_hi = 0.0;
    double gamma_hi = 0.0;
    std::vector<std::string> warnings;
};
HypothesisReport check_hypotheses(double alpha, const ScalingParams& s);

// Intensity of jumps with radius above eps^-rho.
double large_jump_rate(const NoiseSpec& spec, double eps, double rho);

// Per-direction intensity of retained small jumps, radius in (r_min, eps^-rho].
double small_jump_rate(const NoiseSpec& spec, int dir, double eps, double rho);

struct Jump {
    int dir = 0;
    double r = 0.0;  // radial amplitude (unscaled by eps)
};

// Radius conditioned on r > eps^-rho, direction by weight.
Jump sample_large_jump(const NoiseSpec& spec, double eps, double rho, Stream& rng);

// Accumulates eps * sum_jumps r v_i over a window dt into `into`.
// Returns the number of small jumps drawn.
long add_small_increments(const NoiseSpec& spec, double eps, double rho,
                          double dt, double eps_scale, SpectralField& into,
                          Stream& rng);

}  // namespace chafee
