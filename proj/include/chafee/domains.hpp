#pragma once

#include <string>
#include <vector>

#include "chafee/dynamics.hpp"
#include "chafee/noise.hpp"

namespace chafee {

enum class Basin { Minus = -1, Unresolved = 0, Plus = 1 };

struct ClassifyOptions {
    double tol = 1e-3;       // settle distance for the plain classifier
    double t_max = 200.0;    // give up beyond this horizon
    double dt_factor = 5.0;  // classification integrates at dt_factor * model dt
};

struct ProbeOptions {
    int count = 8;               // +-sin(k pi z) sup-normalized probe profiles
    double stride_factor = 10.0; // probe sampling stride along trajectories, in model dt
    double safety = 0.8;         // certified fraction of the bisected safe ball
};

// Geometry of the two attraction basins: classification of states,
// probe-approximated reduced domains (states whose trajectory keeps
// sup-norm margins inside the basin), and radial exit thresholds.
//
// The reduced-domain test is a finite probe approximation: margins are
// exercised along probe directions at sampled times, with a certified
// sup-ball around the equilibrium used both to terminate walks early and
// to prescreen probe points.  Its quality is measured empirically by the
// event-diagnostic violation rate, not proven.
//
// Instances carry scratch buffers; copy per thread instead of sharing.
class DomainGeometry {
public:
    DomainGeometry(const Dynamics& dyn, const SpectralField& phi_plus,
                   ClassifyOptions copt = {}, ProbeOptions popt = {});

    Basin classify(const SpectralField& x) const;        // safe-ball accelerated
    Basin classify_plain(const SpectralField& x) const;  // settles to tol, base-dt accuracy

    bool in_domain(const SpectralField& x, int sign) const;
    bool in_reduced(const SpectralField& x, int sign,
                    const std::vector<double>& deltas) const;

    // sup s such that phi_sign + s v stays in the reduced domain; +inf if
    // the ray never leaves up to s_cap.
    double threshold_radius(int sign, const SpectralField& v,
                            const std::vector<double>& deltas,
                            double rel_tol = 1e-3, double s_cap = 64.0) const;

    double safe_radius(int sign) const { return sign > 0 ? safe_plus_ : safe_minus_; }
    const SpectralField& phi(int sign) const { return sign > 0 ? phi_plus_ : phi_minus_; }
    const std::vector<double>& phi_grid(int sign) const {
        return sign > 0 ? phig_plus_ : phig_minus_;
    }
    const Dynamics& dynamics() const { return dyn_; }
    const std::vector<SpectralField>& probes() const { return probes_; }

    // sup_j |grid[j] - phi_sign(z_j)|
    double grid_dist(const std::vector<double>& grid, int sign) const;

private:
    Dynamics dyn_;
    ClassifyOptions copt_;
    ProbeOptions popt_;
    SpectralField phi_plus_, phi_minus_;
    std::vector<double> phig_plus_, phig_minus_;
    std::vector<SpectralField> probes_;
    std::vector<std::vector<double>> probe_grids_;
    double safe_plus_ = 0.0, safe_minus_ = 0.0;
    mutable std::vector<double> g_;
};

struct ThresholdTable {
    struct Row {
        double lambda = 0.0;
        int sign = 1;
        int dir = 0;
        std::vector<double> deltas;
        double radius = 0.0;  // +inf encoded as infinity
    };
    std::vector<Row> rows;

    // exact-match lookup; throws std::out_of_range if absent
    double find(int sign, int dir, const std::vector<double>& deltas) const;
    bool has(int sign, int dir, const std::vector<double>& deltas) const;
};

// Bisects every (sign, direction, delta-set) combination.  With
// mirror_symmetry the minus-sign rows reuse the plus-sign result of the
// negated direction instead of a second bisection.  workers > 1 spreads
// the bisections over threads (each with its own geometry copy); the
// resulting rows are identical to a serial build.
ThresholdTable build_threshold_table(const DomainGeometry& geom, const NoiseSpec& spec,
                                     const std::vector<std::vector<double>>& delta_sets,
                                     bool mirror_symmetry = true, int workers = 1);

// eps^alpha sum_i w_i R_i^-alpha with R_i the unreduced ray thresholds.
double characteristic_rate(const NoiseSpec& spec, double eps,
                           const ThresholdTable& table, int sign);

// Structural checks on a built table: transitions are possible at all
// (some unreduced ray threshold is finite), and the jump-measure mass of
// the shell between the full and twice-reduced domains shrinks with the
// intensity (margins eps^gamma, eps^2gamma collapse as eps -> 0).
struct TransitionReport {
    bool nontrivial = false;
    std::vector<double> eps;
    std::vector<double> shell_mass;  // per eps, >= 0
    bool shrinking = true;           // masses non-increasing along the grid
};
TransitionReport check_transitions(const NoiseSpec& spec, const ThresholdTable& table,
                                   const std::vector<double>& eps_grid,
                                   const ScalingParams& scal, int sign);

// CSV round trip; a non-empty config_hash is stored as a leading comment
// so consumers can match tables to the config that produced them.
void save_table(const std::string& path, const ThresholdTable& table,
                const std::string& config_hash = "");
ThresholdTable load_table(const std::string& path, std::string* config_hash = nullptr);

}  // namespace chafee
