#include "chafee/exit_mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace chafee {

namespace {

double sup_of(const std::vector<double>& grid) {
    double m = 0.0;
    for (double v : grid) m = std::max(m, std::abs(v));
    return m;
}

// Per-eps sampling constants, hoisted out of the stepping loop.
struct SmallJumpPlan {
    double hi = 0.0;          // truncation radius eps^-rho
    double a_lo = 0.0;        // r_min^-alpha
    double a_hi = 0.0;        // hi^-alpha
    double inv_alpha = 0.0;
    int ndir = 0;
    double rate[8] = {};      // per-direction intensity
    double mean_dt[8] = {};   // intensity * base dt
    double p0_dt[8] = {};     // exp(-mean_dt)

    SmallJumpPlan(const NoiseSpec& spec, double eps, double rho, double dt) {
        hi = std::pow(eps, -rho);
        a_lo = std::pow(spec.r_min, -spec.alpha);
        a_hi = hi > spec.r_min ? std::pow(hi, -spec.alpha) : a_lo;
        inv_alpha = -1.0 / spec.alpha;
        ndir = (int)spec.dirs.size();
        for (int i = 0; i < ndir; ++i) {
            rate[i] = std::max(0.0, spec.dirs[i].weight * (a_lo - a_hi));
            mean_dt[i] = rate[i] * dt;
            p0_dt[i] = std::exp(-mean_dt[i]);
        }
    }

    double draw_radius(Stream& rng) const {
        return std::pow(a_lo - rng.u01() * (a_lo - a_hi), inv_alpha);
    }

    static long count(double p0, double mean, Stream& rng) {
        double p = p0, acc = p0;
        double u = rng.u01();
        long k = 0;
        while (u > acc && k < 4096) {
            ++k;
            p *= mean / (double)k;
            acc += p;
        }
        return k;
    }

    // Adds the aggregated small jumps of one base step to the coefficients.
    void add(const NoiseSpec& spec, double eps, SpectralField& y, Stream& rng) const {
        for (int i = 0; i < ndir; ++i) {
            long n = count(p0_dt[i], mean_dt[i], rng);
            if (n == 0) continue;
            double sum = 0.0;
            for (long k = 0; k < n; ++k) sum += draw_radius(rng);
            double c = eps * sum;
            const SpectralField& v = spec.dirs[i].v;
            for (std::size_t m = 0; m < y.modes(); ++m) y[m] += c * v[m];
        }
    }

    // Same for an irregular (remainder) step length.
    void add_window(const NoiseSpec& spec, double eps, double window,
                    SpectralField& y, Stream& rng) const {
        for (int i = 0; i < ndir; ++i) {
            double mean = rate[i] * window;
            long n = count(std::exp(-mean), mean, rng);
            if (n == 0) continue;
            double sum = 0.0;
            for (long k = 0; k < n; ++k) sum += draw_radius(rng);
            double c = eps * sum;
            const SpectralField& v = spec.dirs[i].v;
            for (std::size_t m = 0; m < y.modes(); ++m) y[m] += c * v[m];
        }
    }
};

}  // namespace

ExitSimulator::ExitSimulator(DomainGeometry geom, NoiseSpec spec, ScalingParams scal,
                             ThresholdTable table, RelaxationFit relax)
    : geom_(std::move(geom)),
      spec_(std::move(spec)),
      scal_(scal),
      table_(std::move(table)),
      relax_(relax) {}

double ExitSimulator::exit_rate(double eps, int sign) const {
    return characteristic_rate(spec_, eps, table_, sign);
}

std::vector<std::vector<double>> required_delta_sets(double eps, const ScalingParams& scal) {
    const double delta1 = std::pow(eps, scal.gamma);
    const double delta2 = std::pow(eps, 2.0 * scal.gamma);
    return {{}, {delta1}, {delta1, delta2}, {eps}};
}

ExitRecord ExitSimulator::simulate_path(double eps, std::uint64_t master_seed,
                                        std::uint64_t seed_id,
                                        std::vector<EpochDiagnostics>* diag,
                                        std::vector<TrajectorySample>* traj) const {
    const Dynamics& dyn = geom_.dynamics();
    const SineBasis& basis = dyn.basis();
    const double dt = dyn.params().dt;
    const int sign = start_sign;
    const Basin want = sign > 0 ? Basin::Plus : Basin::Minus;

    const double rate = exit_rate(eps, sign);
    const double beta = large_jump_rate(spec_, eps, scal_.rho);
    if (!(rate > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("exit rate and jump rate must be positive");
    const double t_censor = censor_factor / rate;

    const double delta1 = std::pow(eps, scal_.gamma);
    const double delta2 = std::pow(eps, 2.0 * scal_.gamma);
    const std::vector<double> dset1 = {delta1};
    const std::vector<double> dset2 = {delta1, delta2};
    const double r_safe = geom_.safe_radius(sign);
    const double screen_reduced = r_safe - delta1;
    const double dev_gate = 0.5 * delta2;
    const double t_gate = relax_.t_rec + relax_.kappa * scal_.gamma * std::abs(std::log(eps));

    // membership with prescreens; 'margin' is the sum of the delta set
    auto member = [&](const SpectralField& z, double screen,
                      const std::vector<double>& ds) {
        double d = geom_.grid_dist(basis.eval(z), sign);
        if (d <= screen) return true;
        if (geom_.classify(z) != want) return false;
        if (ds.empty()) return true;
        return geom_.in_reduced(z, sign, ds);
    };

    SmallJumpPlan plan(spec_, eps, scal_.rho, dt);
    Stream rng(master_seed, seed_id);

    ExitRecord rec;
    rec.seed_id = seed_id;
    rec.epsilon = eps;

    SpectralField y = geom_.phi(sign);
    SpectralField comp;  // per-epoch deterministic companion
    std::vector<double> cg, yg_snap;
    double tau = 0.0;
    double y_hint = 0.0;     // sup estimate fed to the stabilized stepper
    double comp_hint = 0.0;  // (0 forces a fresh evaluation)
    const int check_every = 10;
    const int traj_every = 50;

    bool done = false;
    while (!done) {
        double t_epoch = rng.exponential(beta);
        if (tau + t_epoch > t_censor) {
            rec.tau = t_censor;
            rec.cause = ExitCause::Censored;
            break;
        }

        EpochDiagnostics ep;
        ep.t_len = t_epoch;
        ep.long_epoch = t_epoch >= t_gate;
        double sup_dev = 0.0;
        if (diag) {
            comp = y;
            comp_hint = 0.0;
        }

        long n_steps = (long)(t_epoch / dt);
        double rem = t_epoch - (double)n_steps * dt;
        long stepped = 0;
        bool exited_mid = false;

        auto safety_check = [&](const std::vector<double>& grid, double t_in_epoch) {
            double d = geom_.grid_dist(grid, sign);
            // stepped is one past the loop counter here, so align the
            // sampling cadence with the checked steps s = 0, 50, 100, ...
            if (traj && ((stepped - 1) % traj_every == 0))
                traj->push_back({tau + t_in_epoch, d});
            if (d <= screen_reduced) return false;
            if (!geom_.in_reduced(y, sign, dset1)) {
                ep.stayed_reduced = false;
                rec.tau = tau + t_in_epoch;
                rec.cause = ExitCause::DriftOrSmallNoise;
                return true;
            }
            return false;
        };

        for (long s = 0; s < n_steps && !exited_mid; ++s) {
            dyn.step_stabilized(y, dt, y_hint);
            // last_eval samples the state at the step start, one step stale
            y_hint = sup_of(dyn.last_eval());
            const bool check = (s % check_every) == 0;
            if (diag) {
                // companion shares the stepper, so snapshot the path grid first
                if (check) yg_snap = dyn.last_eval();
                if (check) {
                    double dv = 0.0;
                    basis.eval(comp, cg);
                    for (std::size_t m = 0; m < cg.size(); ++m)
                        dv = std::max(dv, std::abs(yg_snap[m] - cg[m]));
                    sup_dev = std::max(sup_dev, dv);
                }
                dyn.step_stabilized(comp, dt, comp_hint);
                comp_hint = sup_of(dyn.last_eval());
            }
            plan.add(spec_, eps, y, rng);
            ++stepped;
            if (check &&
                safety_check(diag ? yg_snap : dyn.last_eval(), (double)(s + 1) * dt))
                exited_mid = true;
        }
        if (exited_mid) {
            if (diag) {
                ep.e_holds = sup_dev <= dev_gate;
                diag->push_back(ep);
            }
            break;
        }
        if (rem > 1e-12) {
            dyn.step_stabilized(y, rem, y_hint);
            if (diag) dyn.step_stabilized(comp, rem, comp_hint);
            plan.add_window(spec_, eps, rem, y, rng);
        }
        tau += t_epoch;

        Jump jump = sample_large_jump(spec_, eps, scal_.rho, rng);
        ++rec.n_large_jumps;
        {
            const SpectralField& v = spec_.dirs[jump.dir].v;
            double c = eps * jump.r;
            for (std::size_t m = 0; m < y.modes(); ++m) y[m] += c * v[m];
        }
        y_hint = 0.0;  // the kick invalidates the amplitude estimate

        bool inside = member(y, screen_reduced, dset1);
        if (diag) {
            ep.ended_by_jump = true;
            ep.jump_dir = jump.dir;
            ep.jump_r = jump.r;
            ep.landed_reduced = inside;
            if (inside)
                ep.landed_double = member(y, r_safe - delta1 - delta2, dset2);
            ep.e_holds = sup_dev <= dev_gate;  // deviation is a pre-jump quantity
            diag->push_back(ep);
        }
        if (!inside) {
            rec.tau = tau;
            rec.cause = ExitCause::LargeJump;
            done = true;
        }
    }

    rec.normalized_tau = rate * rec.tau;
    return rec;
}

EnsembleResult run_ensemble(const ExitSimulator& sim, const EnsembleOptions& opt,
                            const std::vector<std::uint64_t>& skip,
                            const std::function<void(const ExitRecord&)>& sink) {
    std::vector<std::uint64_t> todo;
    const long total = (long)opt.eps_grid.size() * opt.n_paths;
    {
        std::vector<bool> skipmask;
        skipmask.resize(total, false);
        for (auto s : skip)
            if (s < (std::uint64_t)total) skipmask[s] = true;
        for (long i = 0; i < total; ++i)
            if (!skipmask[i]) todo.push_back((std::uint64_t)i);
    }

    EnsembleResult out;
    std::atomic<std::size_t> next{0};
    std::mutex mtx;
    std::atomic<long> failures{0};

    auto worker = [&]() {
        ExitSimulator local = sim;  // private scratch per thread
        std::vector<EpochDiagnostics> dbuf;
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= todo.size()) return;
            std::uint64_t seed_id = todo[i];
            double eps = opt.eps_grid[seed_id / opt.n_paths];
            dbuf.clear();
            try {
                ExitRecord rec = local.simulate_path(
                    eps, opt.master_seed, seed_id,
                    opt.diagnostics ? &dbuf : nullptr, nullptr);
                std::lock_guard<std::mutex> lk(mtx);
                out.records.push_back(rec);
                if (opt.diagnostics)
                    out.epochs.insert(out.epochs.end(), dbuf.begin(), dbuf.end());
                if (sink) sink(rec);
            } catch (const std::exception&) {
                failures.fetch_add(1);
            }
        }
    };

    int nw = std::max(1, opt.workers);
    if (nw == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int i = 0; i < nw; ++i) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    out.failures = failures.load();
    if (total > 0 && (double)out.failures > opt.max_failure_fraction * (double)total)
        throw std::runtime_error("ensemble aborted: more than " +
                                 std::to_string(100.0 * opt.max_failure_fraction) +
                                 "% of paths failed");
    std::sort(out.records.begin(), out.records.end(),
              [](const ExitRecord& a, const ExitRecord& b) { return a.seed_id < b.seed_id; });
    long censored = 0;
    for (const auto& r : out.records)
        if (r.cause == ExitCause::Censored) ++censored;
    out.censored_fraction =
        out.records.empty() ? 0.0 : (double)censored / (double)out.records.size();
    return out;
}

DeviationEstimate deviation_probability(const DomainGeometry& geom, const NoiseSpec& spec,
                                        const ScalingParams& scal, double eps,
                                        long n_samples, std::uint64_t master_seed) {
    const Dynamics& dyn = geom.dynamics();
    const double dt = dyn.params().dt;
    const double beta = large_jump_rate(spec, eps, scal.rho);
    const double thr = 0.5 * std::pow(eps, 2.0 * scal.gamma);
    SmallJumpPlan plan(spec, eps, scal.rho, dt);

    bool quiet = true;  // zero-intensity small-jump part never deviates
    for (int i = 0; i < plan.ndir; ++i)
        if (plan.rate[i] > 0.0) quiet = false;

    long crossings = 0;
    for (long s = 0; s < n_samples && !quiet; ++s) {
        Stream rng(master_seed ^ 0x9D5AB1E5EEDull, (std::uint64_t)s);
        double t_epoch = rng.exponential(beta);
        SpectralField y = geom.phi(+1);
        long n_steps = (long)(t_epoch / dt);
        double hint = 0.0;
        for (long k = 0; k < n_steps; ++k) {
            dyn.step_stabilized(y, dt, hint);
            hint = sup_of(dyn.last_eval());
            plan.add(spec, eps, y, rng);
            // deviation from the constant companion, one step of lag
            if (geom.grid_dist(dyn.last_eval(), +1) > thr) {
                ++crossings;
                break;
            }
        }
    }

    DeviationEstimate est;
    est.n = n_samples;
    if (n_samples > 0) {
        est.p = (double)crossings / (double)n_samples;
        est.se = std::sqrt(est.p * (1.0 - est.p) / (double)n_samples);
    }
    return est;
}

EventSummary tag_epoch_events(const std::vector<EpochDiagnostics>& diag,
                              const NoiseSpec& spec, const ScalingParams& scal,
                              const ThresholdTable& table, double eps, int sign) {
    EventSummary sum;
    const double delta1 = std::pow(eps, scal.gamma);
    const double delta2 = std::pow(eps, 2.0 * scal.gamma);
    const std::vector<double> dset2 = {delta1, delta2};
    const std::vector<double> dlit = {eps};

    for (const auto& ep : diag) {
        ++sum.epochs;
        if (!ep.e_holds) ++sum.e_fail;
        if (ep.long_epoch) ++sum.long_epochs;
        if (!ep.ended_by_jump) continue;
        ++sum.ended_by_jump;

        bool a = ep.stayed_reduced && ep.landed_reduced;
        bool b = ep.stayed_reduced && !ep.landed_reduced;
        bool am = a && ep.landed_double;
        bool c = a && !ep.landed_double;
        if (a) ++sum.a;
        if (b) ++sum.b;
        if (c) ++sum.c;
        if (am) ++sum.a_minus;

        if (!(ep.e_holds && ep.long_epoch)) continue;
        double s = eps * ep.jump_r;
        double vsup = spec.dirs[ep.jump_dir].v_sup;

        if (a) {
            ++sum.gate_i;
            double r0 = table.find(sign, ep.jump_dir, {});
            if (!(std::isinf(r0) || s <= r0)) ++sum.viol_i;
        }
        if (b) {
            ++sum.gate_ii;
            double rt = table.find(sign, ep.jump_dir, dset2);
            if (!(s > rt)) ++sum.viol_ii;
        }
        if (c) {
            ++sum.gate_iii;
            double rt = table.find(sign, ep.jump_dir, dset2);
            double rl = table.find(sign, ep.jump_dir, dlit);
            double slack = vsup > 0.0 ? delta2 / vsup : 0.0;
            bool lower_ok = s > rt - slack;
            bool upper_ok = std::isinf(rl) || s < rl + slack;
            if (!(lower_ok && upper_ok)) ++sum.viol_iii;
        }
    }
    long gates = sum.gate_i + sum.gate_ii + sum.gate_iii;
    long viols = sum.viol_i + sum.viol_ii + sum.viol_iii;
    sum.violation_rate = gates > 0 ? (double)viols / (double)gates : 0.0;
    return sum;
}

}  // namespace chafee
