#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "chafee/domains.hpp"
#include "chafee/equilibria.hpp"
#include "chafee/noise.hpp"

namespace chafee {

enum class ExitCause { LargeJump, DriftOrSmallNoise, Censored };

struct ExitRecord {
    std::uint64_t seed_id = 0;
    double epsilon = 0.0;
    double tau = 0.0;
    double normalized_tau = 0.0;  // characteristic rate times tau
    long n_large_jumps = 0;
    ExitCause cause = ExitCause::Censored;
};

// Per inter-jump epoch bookkeeping for the event-algebra diagnostics.
struct EpochDiagnostics {
    double t_len = 0.0;
    bool stayed_reduced = true;   // path kept the margin through the epoch
    bool landed_reduced = false;  // post-jump state in the margin domain
    bool landed_double = false;   // post-jump state in the twice-reduced domain
    bool e_holds = true;          // deviation from deterministic flow stayed small
    bool long_epoch = false;      // epoch outlasted the relaxation gate
    bool ended_by_jump = false;
    int jump_dir = -1;
    double jump_r = 0.0;
};

struct TrajectorySample {
    double t = 0.0;
    double dist = 0.0;  // sup distance to the starting equilibrium
};

// Margin sets the simulator and the epoch tagger look up in the
// threshold table at intensity eps: unreduced, single margin eps^gamma,
// stacked margins (eps^gamma, eps^2gamma), and the literal-eps margin
// used by the landing-shell check.
std::vector<std::vector<double>> required_delta_sets(double eps, const ScalingParams& scal);

// Exit-time sampler: epochs of small-jump-perturbed flow separated by
// compound-Poisson large jumps; the path exits when it leaves the
// margin-reduced basin.  Exit detection is tiered: a certified sup-ball
// prescreen settles almost every check, full classification or probe
// membership runs only near the basin boundary.
class ExitSimulator {
public:
    ExitSimulator(DomainGeometry geom, NoiseSpec spec, ScalingParams scal,
                  ThresholdTable table, RelaxationFit relax);

    ExitRecord simulate_path(double eps, std::uint64_t master_seed,
                             std::uint64_t seed_id,
                             std::vector<EpochDiagnostics>* diag = nullptr,
                             std::vector<TrajectorySample>* traj = nullptr) const;

    double exit_rate(double eps, int sign) const;  // characteristic rate

    const DomainGeometry& geometry() const { return geom_; }
    const NoiseSpec& noise() const { return spec_; }
    const ScalingParams& scaling() const { return scal_; }
    const ThresholdTable& table() const { return table_; }
    const RelaxationFit& relaxation() const { return relax_; }

    double censor_factor = 50.0;  // censor horizon = factor / exit rate
    int start_sign = +1;

private:
    DomainGeometry geom_;
    NoiseSpec spec_;
    ScalingParams scal_;
    ThresholdTable table_;
    RelaxationFit relax_;
};

struct EnsembleOptions {
    std::vector<double> eps_grid;
    long n_paths = 0;
    std::uint64_t master_seed = 1;
    int workers = 1;
    bool diagnostics = false;
    double max_failure_fraction = 0.01;
};

struct EnsembleResult {
    std::vector<ExitRecord> records;  // sorted by seed_id
    std::vector<EpochDiagnostics> epochs;
    long failures = 0;
    double censored_fraction = 0.0;
};

// seed_id = eps_index * n_paths + path_index.  Record content is
// independent of worker count; `skip` lists seed_ids already on disk.
// `sink`, if set, is called under a lock as records complete.
EnsembleResult run_ensemble(const ExitSimulator& sim, const EnsembleOptions& opt,
                            const std::vector<std::uint64_t>& skip = {},
                            const std::function<void(const ExitRecord&)>& sink = {});

struct DeviationEstimate {
    double p = 0.0;
    double se = 0.0;
    long n = 0;
};

// P(sup |Y - phi|_inf over one inter-jump epoch exceeds eps^{2 gamma}/2)
// for the small-jump flow started at the equilibrium.
DeviationEstimate deviation_probability(const DomainGeometry& geom, const NoiseSpec& spec,
                                        const ScalingParams& scal, double eps,
                                        long n_samples, std::uint64_t master_seed);

struct EventSummary {
    long epochs = 0;
    long ended_by_jump = 0;
    long a = 0, b = 0, c = 0, a_minus = 0;
    long e_fail = 0;       // deviation gate failures
    long long_epochs = 0;
    long gate_i = 0, gate_ii = 0, gate_iii = 0;
    long viol_i = 0, viol_ii = 0, viol_iii = 0;
    double violation_rate = 0.0;  // violations / gated epochs, 0 when no gate opened
};

// Cross-checks the epoch flags against the pure-noise ray events through
// the threshold table (the inclusion statements relating path events to
// jump-size events).
EventSummary tag_epoch_events(const std::vector<EpochDiagnostics>& diag,
                              const NoiseSpec& spec, const ScalingParams& scal,
                              const ThresholdTable& table, double eps, int sign);

}  // namespace chafee
