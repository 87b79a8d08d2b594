#include "chafee/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <climits>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace chafee {

const char* const kSeedEnvVar = "CHAFEE_MASTER_SEED";

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

void fail(ConfigDiagnostics& diag, int line, const std::string& msg) {
    diag.errors.push_back("line " + std::to_string(line) + ": " + msg);
}

bool parse_double(const std::string& v, double& out) {
    const char* b = v.data();
    const char* e = b + v.size();
    auto res = std::from_chars(b, e, out);
    return res.ec == std::errc{} && res.ptr == e && std::isfinite(out);
}

bool parse_long(const std::string& v, long& out) {
    const char* b = v.data();
    const char* e = b + v.size();
    auto res = std::from_chars(b, e, out);
    return res.ec == std::errc{} && res.ptr == e;
}

bool parse_int(const std::string& v, int& out) {
    long l;
    if (!parse_long(v, l) || l < INT_MIN || l > INT_MAX) return false;
    out = static_cast<int>(l);
    return true;
}

bool parse_u64(const std::string& v, std::uint64_t& out) {
    const char* b = v.data();
    const char* e = b + v.size();
    auto res = std::from_chars(b, e, out);
    return res.ec == std::errc{} && res.ptr == e;
}

bool parse_bool(const std::string& v, bool& out) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return out = true, true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return out = false, true;
    return false;
}

bool parse_list(const std::string& v, std::vector<double>& out) {
    out.clear();
    std::size_t pos = 0;
    while (pos <= v.size()) {
        std::size_t comma = v.find(',', pos);
        if (comma == std::string::npos) comma = v.size();
        const std::string item = trim(v.substr(pos, comma - pos));
        if (item.empty()) return false;
        double d;
        if (!parse_double(item, d)) return false;
        out.push_back(d);
        pos = comma + 1;
    }
    return !out.empty();
}

std::string join(const std::vector<double>& v) {
    std::string out;
    char buf[40];
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        auto res = std::to_chars(buf, buf + sizeof(buf), v[i]);
        out.append(buf, res.ptr);
    }
    return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, ConfigDiagnostics& diag) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = trim(raw);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']') {
                fail(diag, line, "unterminated section header '" + s + "'");
                continue;
            }
            section = trim(s.substr(1, s.size() - 2));
            if (section != "model" && section != "noise" && section != "scaling" &&
                section != "mc" && section != "io")
                fail(diag, line, "unknown section [" + section + "]");
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) {
            fail(diag, line, "expected key = value, got '" + s + "'");
            continue;
        }
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        if (key.empty()) {
            fail(diag, line, "empty key");
            continue;
        }
        if (val.empty()) {
            fail(diag, line, "empty value for '" + key + "'");
            continue;
        }
        if (section.empty()) {
            fail(diag, line, "key '" + key + "' appears before any [section] header");
            continue;
        }
        bool ok = true;
        if (section == "model") {
            if (key == "lambda") ok = parse_double(val, cfg.model.lambda);
            else if (key == "n_modes") ok = parse_int(val, cfg.model.n_modes);
            else if (key == "dt") ok = parse_double(val, cfg.model.dt);
            else if (key == "grid_points") ok = parse_int(val, cfg.model.grid_points);
            else { fail(diag, line, "unknown key '" + key + "' in [model]"); continue; }
        } else if (section == "noise") {
            if (key == "alpha") ok = parse_double(val, cfg.noise.alpha);
            else if (key == "directions") cfg.noise.directions = val;
            else if (key == "weights") ok = parse_list(val, cfg.noise.weights);
            else if (key == "r_min") ok = parse_double(val, cfg.noise.r_min);
            else { fail(diag, line, "unknown key '" + key + "' in [noise]"); continue; }
        } else if (section == "scaling") {
            if (key == "rho") ok = parse_double(val, cfg.scaling.rho);
            else if (key == "gamma") ok = parse_double(val, cfg.scaling.gamma);
            else if (key == "theta" || key == "Theta") ok = parse_double(val, cfg.scaling.theta);
            else if (key == "gamma_cap" || key == "Gamma_cap")
                ok = parse_double(val, cfg.scaling.gamma_cap);
            else if (key == "epsilon_grid") ok = parse_list(val, cfg.scaling.epsilon_grid);
            else { fail(diag, line, "unknown key '" + key + "' in [scaling]"); continue; }
        } else if (section == "mc") {
            if (key == "n_paths") ok = parse_long(val, cfg.mc.n_paths);
            else if (key == "master_seed") ok = parse_u64(val, cfg.mc.master_seed);
            else if (key == "t_max_path_factor") ok = parse_double(val, cfg.mc.t_max_path_factor);
            else if (key == "theta_grid") ok = parse_list(val, cfg.mc.theta_grid);
            else if (key == "dt_probe_factor") ok = parse_double(val, cfg.mc.dt_probe_factor);
            else if (key == "probe_count") ok = parse_int(val, cfg.mc.probe_count);
            else { fail(diag, line, "unknown key '" + key + "' in [mc]"); continue; }
        } else if (section == "io") {
            if (key == "out_dir") cfg.io.out_dir = val;
            else if (key == "table_cache") cfg.io.table_cache = val;
            else if (key == "dump_trajectories") ok = parse_bool(val, cfg.io.dump_trajectories);
            else { fail(diag, line, "unknown key '" + key + "' in [io]"); continue; }
        } else {
            // Section header itself was already reported.
            continue;
        }
        if (!ok) fail(diag, line, "cannot parse value '" + val + "' for '" + key + "'");
    }
    return cfg;
}

void validate_config(const ExperimentConfig& cfg, ConfigDiagnostics& diag) {
    for (const auto& e : cfg.model.validate()) diag.errors.push_back("[model] " + e);

    const auto& nz = cfg.noise;
    if (!(nz.alpha > 0.0 && nz.alpha < 2.0))
        diag.errors.push_back("[noise] alpha must lie in (0, 2)");
    if (!(nz.r_min > 0.0)) diag.errors.push_back("[noise] r_min must be positive");
    if (nz.directions != "first_mode" && nz.directions != "equilibrium")
        diag.errors.push_back("[noise] directions must be 'first_mode' or 'equilibrium'");
    if (!nz.weights.empty()) {
        if (nz.weights.size() != 2)
            diag.errors.push_back("[noise] weights must list exactly the +/- pair");
        for (double w : nz.weights)
            if (!(w > 0.0)) diag.errors.push_back("[noise] weights must be positive");
        if (nz.weights.size() == 2 && nz.weights[0] != nz.weights[1])
            diag.errors.push_back(
                "[noise] mirrored directions need equal weights; the small-jump "
                "part is simulated without a compensator");
    }

    const auto& sc = cfg.scaling;
    if (!(sc.rho > 0.0)) diag.errors.push_back("[scaling] rho must be positive");
    if (!(sc.gamma > 0.0)) diag.errors.push_back("[scaling] gamma must be positive");
    if (!(sc.theta > 0.0)) diag.errors.push_back("[scaling] theta must be positive");
    if (!(sc.gamma_cap > 0.0)) diag.errors.push_back("[scaling] gamma_cap must be positive");
    if (sc.epsilon_grid.empty()) {
        diag.errors.push_back("[scaling] epsilon_grid must not be empty");
    } else {
        for (double e : sc.epsilon_grid)
            if (!(e > 0.0 && e < 1.0)) {
                diag.errors.push_back("[scaling] epsilon_grid entries must lie in (0, 1)");
                break;
            }
        for (std::size_t i = 1; i < sc.epsilon_grid.size(); ++i)
            if (!(sc.epsilon_grid[i] < sc.epsilon_grid[i - 1])) {
                diag.errors.push_back("[scaling] epsilon_grid must be strictly decreasing");
                break;
            }
    }
    if (nz.alpha > 0.0 && nz.alpha < 2.0 && sc.rho > 0.0 && sc.gamma > 0.0 &&
        sc.theta > 0.0 && sc.gamma_cap > 0.0) {
        const HypothesisReport rep = check_hypotheses(nz.alpha, sc.params());
        for (const auto& w : rep.warnings) diag.warnings.push_back("[scaling] " + w);
    }

    const auto& mc = cfg.mc;
    if (mc.n_paths < 0) diag.errors.push_back("[mc] n_paths must be non-negative");
    if (!(mc.t_max_path_factor > 0.0))
        diag.errors.push_back("[mc] t_max_path_factor must be positive");
    for (double t : mc.theta_grid)
        if (!(t > -1.0)) {
            diag.errors.push_back("[mc] theta_grid entries must exceed -1");
            break;
        }
    if (!(mc.dt_probe_factor >= 1.0))
        diag.errors.push_back("[mc] dt_probe_factor must be at least 1");
    if (mc.probe_count < 2 || mc.probe_count % 2 != 0)
        diag.errors.push_back("[mc] probe_count must be a positive even number");

    if (cfg.io.out_dir.empty()) diag.errors.push_back("[io] out_dir must not be empty");
    if (cfg.io.table_cache.empty()) diag.errors.push_back("[io] table_cache must not be empty");
}

void apply_env_overrides(ExperimentConfig& cfg, ConfigDiagnostics& diag) {
    const char* v = std::getenv(kSeedEnvVar);
    if (!v || !*v) return;
    std::uint64_t seed;
    if (parse_u64(v, seed)) {
        cfg.mc.master_seed = seed;
        diag.warnings.push_back(std::string(kSeedEnvVar) + " overrides master_seed");
    } else {
        diag.errors.push_back(std::string(kSeedEnvVar) + ": cannot parse '" + v + "'");
    }
}

ExperimentConfig load_config_file(const std::string& path, ConfigDiagnostics& diag) {
    std::ifstream in(path);
    if (!in) {
        diag.errors.push_back("cannot open config file '" + path + "'");
        return {};
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    ExperimentConfig cfg = parse_config(buf.str(), diag);
    apply_env_overrides(cfg, diag);
    if (diag.ok()) validate_config(cfg, diag);
    return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::string out;
    char buf[160];
    auto num = [&](const char* key, double v) {
        char nb[40];
        auto res = std::to_chars(nb, nb + sizeof(nb), v);
        *res.ptr = '\0';
        std::snprintf(buf, sizeof(buf), "%s = %s\n", key, nb);
        out += buf;
    };
    out += "[model]\n";
    num("lambda", cfg.model.lambda);
    std::snprintf(buf, sizeof(buf), "n_modes = %d\n", cfg.model.n_modes);
    out += buf;
    num("dt", cfg.model.dt);
    std::snprintf(buf, sizeof(buf), "grid_points = %d\n", cfg.model.grid_points);
    out += buf;
    out += "\n[noise]\n";
    num("alpha", cfg.noise.alpha);
    out += "directions = " + cfg.noise.directions + "\n";
    if (!cfg.noise.weights.empty()) out += "weights = " + join(cfg.noise.weights) + "\n";
    num("r_min", cfg.noise.r_min);
    out += "\n[scaling]\n";
    num("rho", cfg.scaling.rho);
    num("gamma", cfg.scaling.gamma);
    num("theta", cfg.scaling.theta);
    num("gamma_cap", cfg.scaling.gamma_cap);
    out += "epsilon_grid = " + join(cfg.scaling.epsilon_grid) + "\n";
    out += "\n[mc]\n";
    std::snprintf(buf, sizeof(buf), "n_paths = %ld\n", cfg.mc.n_paths);
    out += buf;
    std::snprintf(buf, sizeof(buf), "master_seed = %llu\n",
                  static_cast<unsigned long long>(cfg.mc.master_seed));
    out += buf;
    num("t_max_path_factor", cfg.mc.t_max_path_factor);
    out += "theta_grid = " + join(cfg.mc.theta_grid) + "\n";
    num("dt_probe_factor", cfg.mc.dt_probe_factor);
    std::snprintf(buf, sizeof(buf), "probe_count = %d\n", cfg.mc.probe_count);
    out += buf;
    out += "\n[io]\n";
    out += "out_dir = " + cfg.io.out_dir + "\n";
    out += "table_cache = " + cfg.io.table_cache + "\n";
    out += std::string("dump_trajectories = ") +
           (cfg.io.dump_trajectories ? "true" : "false") + "\n";
    return out;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    // Output locations do not influence any computed number, so the
    // hash covers the numeric sections only; pointing --out elsewhere
    // keeps cached tables valid.
    ExperimentConfig numeric = cfg;
    numeric.io = IoConfig{};
    const std::string text = serialize_config(numeric);
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64-bit
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string config_hash_hex(const ExperimentConfig& cfg) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg)));
    return buf;
}

NoiseSpec build_noise(const ExperimentConfig& cfg, const SineBasis& basis,
                      const SpectralField& phi_plus) {
    NoiseSpec spec = cfg.noise.directions == "equilibrium"
                         ? make_equilibrium_noise(cfg.noise.alpha, phi_plus, basis,
                                                  cfg.noise.r_min)
                         : make_first_mode_noise(cfg.noise.alpha, basis, cfg.noise.r_min);
    if (cfg.noise.weights.size() == spec.dirs.size())
        for (std::size_t i = 0; i < spec.dirs.size(); ++i)
            spec.dirs[i].weight = cfg.noise.weights[i];
    return spec;
}

}  // namespace chafee
