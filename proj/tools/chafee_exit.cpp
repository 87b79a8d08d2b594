// Command-line driver: equilibria / tables / run / summarize.
//
// All artifacts land under the output directory and start with a
// "# config_hash=..." line; summarize and cached-table reuse refuse
// artifacts whose hash does not match the active config.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "chafee/config.hpp"
#include "chafee/domains.hpp"
#include "chafee/equilibria.hpp"
#include "chafee/exit_mc.hpp"
#include "chafee/records.hpp"
#include "chafee/stats.hpp"

namespace fs = std::filesystem;
using namespace chafee;

namespace {

struct Context {
    ExperimentConfig cfg;
    std::string hash;
    fs::path out;
    fs::path table_path;
    int workers = 1;
    bool build_tables = false;
    bool dump_traj = false;
    bool resume = false;
};

struct Geometry {
    Dynamics dyn;
    EquilibriumSet eqs;
    NoiseSpec noise;
    DomainGeometry geom;
};

Geometry make_geometry(const ExperimentConfig& cfg) {
    Dynamics dyn(cfg.model);
    EquilibriumSet eqs = find_equilibria(dyn);
    NoiseSpec noise = build_noise(cfg, dyn.basis(), eqs.phi_plus);
    const auto problems = noise.validate(dyn.basis());
    if (!problems.empty()) {
        std::string msg = "invalid noise model:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw std::runtime_error(msg);
    }
    ClassifyOptions copt;
    copt.t_max = cfg.model.t_max;
    ProbeOptions popt;
    popt.count = cfg.mc.probe_count;
    popt.stride_factor = cfg.mc.dt_probe_factor;
    DomainGeometry geom(dyn, eqs.phi_plus, copt, popt);
    return {std::move(dyn), std::move(eqs), std::move(noise), std::move(geom)};
}

std::vector<std::vector<double>> all_delta_sets(const ExperimentConfig& cfg) {
    std::vector<std::vector<double>> sets;
    for (double eps : cfg.scaling.epsilon_grid)
        for (auto& ds : required_delta_sets(eps, cfg.scaling.params()))
            if (std::find(sets.begin(), sets.end(), ds) == sets.end())
                sets.push_back(std::move(ds));
    return sets;
}

bool table_covers(const ThresholdTable& table, const ExperimentConfig& cfg, int ndirs) {
    for (const auto& ds : all_delta_sets(cfg))
        for (int sign : {+1, -1})
            for (int d = 0; d < ndirs; ++d)
                if (!table.has(sign, d, ds)) return false;
    return true;
}

ThresholdTable obtain_table(const Context& ctx, const Geometry& g) {
    const int ndirs = (int)g.noise.dirs.size();
    if (fs::exists(ctx.table_path)) {
        std::string hash;
        ThresholdTable table = load_table(ctx.table_path.string(), &hash);
        if (hash == ctx.hash && table_covers(table, ctx.cfg, ndirs)) return table;
        if (!ctx.build_tables)
            throw std::runtime_error("cached tables at '" + ctx.table_path.string() +
                                     "' do not match this config; rerun the tables "
                                     "subcommand or pass --build-tables");
    } else if (!ctx.build_tables) {
        throw std::runtime_error("no threshold tables at '" + ctx.table_path.string() +
                                 "'; run the tables subcommand or pass --build-tables");
    }
    ThresholdTable table =
        build_threshold_table(g.geom, g.noise, all_delta_sets(ctx.cfg), true, ctx.workers);
    save_table(ctx.table_path.string(), table, ctx.hash);
    return table;
}

RelaxationFit make_relaxation(const Geometry& g, const ExperimentConfig& cfg) {
    return fit_relaxation(g.dyn, g.eqs.phi_plus, cfg.scaling.gamma,
                          cfg.scaling.epsilon_grid);
}

int cmd_equilibria(const Context& ctx) {
    Dynamics dyn(ctx.cfg.model);
    EquilibriumSet eqs = find_equilibria(dyn);
    RelaxationFit fit = fit_relaxation(dyn, eqs.phi_plus, ctx.cfg.scaling.gamma,
                                       ctx.cfg.scaling.epsilon_grid);
    std::string text;
    char buf[160];
    auto kv = [&](const char* key, double v) {
        std::snprintf(buf, sizeof(buf), "%s = %.12g\n", key, v);
        text += buf;
    };
    kv("lambda", dyn.params().lambda);
    kv("n_equilibria", (double)eqs.all.size());
    kv("phi_plus_norm", eqs.phi_plus.h_norm());
    kv("phi_plus_sup", dyn.basis().sup_norm(eqs.phi_plus));
    kv("phi_plus_mean", mean_value(eqs.phi_plus));
    kv("phi_plus_energy", dyn.energy(eqs.phi_plus));
    kv("residual_plus", equilibrium_residual(dyn, eqs.phi_plus));
    kv("residual_minus", equilibrium_residual(dyn, eqs.phi_minus));
    kv("residual_zero", equilibrium_residual(dyn, eqs.zero));
    kv("t_rec", fit.t_rec);
    kv("kappa", fit.kappa);
    for (std::size_t i = 0; i < fit.eps.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "settle_time[%.10g] = %.12g\n", fit.eps[i],
                      fit.t[i]);
        text += buf;
    }
    std::ofstream out(ctx.out / "equilibria.txt");
    out << "# config_hash=" << ctx.hash << "\n" << text;
    std::fputs(text.c_str(), stdout);
    return 0;
}

int cmd_tables(const Context& ctx) {
    Geometry g = make_geometry(ctx.cfg);
    ThresholdTable table =
        build_threshold_table(g.geom, g.noise, all_delta_sets(ctx.cfg), true, ctx.workers);
    save_table(ctx.table_path.string(), table, ctx.hash);
    std::printf("wrote %zu threshold rows to %s\n", table.rows.size(),
                ctx.table_path.string().c_str());
    for (const auto& r : table.rows) {
        std::printf("  sign=%+d dir=%d margins=%zu radius=%.6g\n", r.sign, r.dir,
                    r.deltas.size(), r.radius);
    }
    TransitionReport rep =
        check_transitions(g.noise, table, ctx.cfg.scaling.epsilon_grid,
                          ctx.cfg.scaling.params(), +1);
    std::printf("transitions_possible = %s\n", rep.nontrivial ? "true" : "false");
    for (std::size_t i = 0; i < rep.eps.size(); ++i)
        std::printf("separatrix_shell_mass[%.10g] = %.12g\n", rep.eps[i],
                    rep.shell_mass[i]);
    std::printf("shell_mass_shrinking = %s\n", rep.shrinking ? "true" : "false");
    return 0;
}

void dump_trajectory(const Context& ctx, std::uint64_t seed_id,
                     const std::vector<TrajectorySample>& traj) {
    char name[64];
    std::snprintf(name, sizeof(name), "traj_%llu.csv",
                  static_cast<unsigned long long>(seed_id));
    std::ofstream out(ctx.out / name);
    out << "# config_hash=" << ctx.hash << "\nt,dist\n";
    char buf[80];
    for (const auto& s : traj) {
        std::snprintf(buf, sizeof(buf), "%.10g,%.10g\n", s.t, s.dist);
        out << buf;
    }
}

int cmd_run(const Context& ctx) {
    Geometry g = make_geometry(ctx.cfg);
    ThresholdTable table = obtain_table(ctx, g);
    RelaxationFit relax = make_relaxation(g, ctx.cfg);
    ExitSimulator sim(g.geom, g.noise, ctx.cfg.scaling.params(), table, relax);
    sim.censor_factor = ctx.cfg.mc.t_max_path_factor;

    const fs::path rec_path = ctx.out / "records.csv";
    std::vector<std::uint64_t> skip;
    if (ctx.resume && fs::exists(rec_path)) {
        RecordFile prev = load_records(rec_path.string());
        if (prev.config_hash != ctx.hash)
            throw std::runtime_error("existing records at '" + rec_path.string() +
                                     "' come from a different config; refusing to resume");
        skip = recorded_seed_ids(prev);
        std::printf("resuming: %zu records already present\n", skip.size());
    }

    EnsembleOptions opt;
    opt.eps_grid = ctx.cfg.scaling.epsilon_grid;
    opt.n_paths = ctx.cfg.mc.n_paths;
    opt.master_seed = ctx.cfg.mc.master_seed;
    opt.workers = ctx.workers;

    RecordWriter writer(rec_path.string(), ctx.hash, /*append=*/ctx.resume);
    if (ctx.dump_traj) {
        // Trajectory capture runs the paths inline; worker width is ignored.
        std::set<std::uint64_t> done(skip.begin(), skip.end());
        for (std::size_t e = 0; e < opt.eps_grid.size(); ++e) {
            for (long p = 0; p < opt.n_paths; ++p) {
                const std::uint64_t id = (std::uint64_t)e * opt.n_paths + p;
                if (done.count(id)) continue;
                std::vector<TrajectorySample> traj;
                ExitRecord rec =
                    sim.simulate_path(opt.eps_grid[e], opt.master_seed, id, nullptr, &traj);
                writer.write(rec);
                dump_trajectory(ctx, id, traj);
            }
        }
    } else {
        EnsembleResult res = run_ensemble(
            sim, opt, skip, [&](const ExitRecord& rec) { writer.write(rec); });
        std::printf("completed %zu paths (%ld failures, censored fraction %.4g)\n",
                    res.records.size(), res.failures, res.censored_fraction);
    }

    // Canonical order: reload everything and rewrite sorted by seed_id.
    RecordFile all = load_records(rec_path.string());
    std::sort(all.records.begin(), all.records.end(),
              [](const ExitRecord& a, const ExitRecord& b) { return a.seed_id < b.seed_id; });
    save_records(rec_path.string(), ctx.hash, all.records);
    std::printf("records: %s (%zu rows)\n", rec_path.string().c_str(), all.records.size());
    return 0;
}

int cmd_summarize(const Context& ctx) {
    const fs::path rec_path = ctx.out / "records.csv";
    RecordFile file = load_records(rec_path.string());
    if (file.config_hash != ctx.hash)
        throw std::runtime_error("records at '" + rec_path.string() +
                                 "' carry config hash " + file.config_hash +
                                 ", expected " + ctx.hash);
    EnsembleSummary summary = summarize_records(file.records, ctx.cfg.mc.theta_grid,
                                                ctx.cfg.scaling.epsilon_grid);
    const std::string text = summary_text(summary);
    {
        std::ofstream out(ctx.out / "summary.txt");
        out << "# config_hash=" << ctx.hash << "\n" << text;
    }
    {
        std::ofstream out(ctx.out / "summary.csv");
        out << "# config_hash=" << ctx.hash << "\n" << summary_table(summary);
    }
    std::fputs(text.c_str(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"First-exit statistics for a bistable reaction-diffusion system "
                 "under small heavy-tailed forcing"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    Context ctx;
    app.add_option("--config", config_path, "experiment config file")->required();
    app.add_option("--workers", ctx.workers, "worker threads for ensembles and tables")
        ->check(CLI::PositiveNumber);
    app.add_option("--out", out_override, "output directory (overrides [io] out_dir)");
    app.add_flag("--build-tables", ctx.build_tables,
                 "build threshold tables when the cache is missing or stale");
    app.add_flag("--dump-trajectories", ctx.dump_traj,
                 "write per-path distance samples next to the records");
    app.add_flag("--resume", ctx.resume, "skip seed_ids already present in records.csv");

    CLI::App* sub_eq = app.add_subcommand("equilibria", "stationary states and relaxation fit");
    CLI::App* sub_tab = app.add_subcommand("tables", "build and cache exit-threshold tables");
    CLI::App* sub_run = app.add_subcommand("run", "sample first-exit times");
    CLI::App* sub_sum = app.add_subcommand("summarize", "aggregate records into statistics");
    for (CLI::App* s : {sub_eq, sub_tab, sub_run, sub_sum}) s->fallthrough();

    CLI11_PARSE(app, argc, argv);

    ConfigDiagnostics diag;
    ctx.cfg = load_config_file(config_path, diag);
    for (const auto& w : diag.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    if (!diag.ok()) {
        for (const auto& e : diag.errors) std::fprintf(stderr, "error: %s\n", e.c_str());
        return 1;
    }
    if (!out_override.empty()) ctx.cfg.io.out_dir = out_override;
    ctx.hash = config_hash_hex(ctx.cfg);
    ctx.out = ctx.cfg.io.out_dir;
    fs::path cache = ctx.cfg.io.table_cache;
    ctx.table_path = cache.is_absolute() ? cache : ctx.out / cache;

    try {
        fs::create_directories(ctx.out);
        if (sub_eq->parsed()) return cmd_equilibria(ctx);
        if (sub_tab->parsed()) return cmd_tables(ctx);
        if (sub_run->parsed()) return cmd_run(ctx);
        if (sub_sum->parsed()) return cmd_summarize(ctx);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
