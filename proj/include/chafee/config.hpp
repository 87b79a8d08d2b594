#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chafee/dynamics.hpp"
#include "chafee/noise.hpp"

namespace chafee {

// Experiment description parsed from a sectioned key = value file.
// Sections and keys mirror the library structs they feed.
struct NoiseConfig {
    double alpha = 1.5;
    std::string directions = "first_mode";  // first_mode | equilibrium
    std::vector<double> weights;            // optional +/- pair, default 0.5,0.5
    double r_min = 1e-3;
};

struct ScalingConfig {
    double rho = 0.75;
    double gamma = 0.9;
    double theta = 0.1;
    double gamma_cap = 1.0;                 // growth constant in the gamma window
    std::vector<double> epsilon_grid;       // strictly decreasing, in (0,1)

    ScalingParams params() const {
        ScalingParams s;
        s.rho = rho;
        s.gamma = gamma;
        s.theta = theta;
        s.big_gamma = gamma_cap;
        return s;
    }
};

struct McConfig {
    long n_paths = 200;
    std::uint64_t master_seed = 1;
    double t_max_path_factor = 50.0;        // censor horizon in units of 1/rate
    std::vector<double> theta_grid = {0.5, 1.0, 2.0};
    double dt_probe_factor = 10.0;          // probe cadence in model dt units
    int probe_count = 8;
};

struct IoConfig {
    std::string out_dir = "out";
    std::string table_cache = "tables.csv";
    bool dump_trajectories = false;
};

struct ExperimentConfig {
    ModelParams model;
    NoiseConfig noise;
    ScalingConfig scaling;
    McConfig mc;
    IoConfig io;
};

struct ConfigDiagnostics {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

// Parses the sectioned key = value format.  Unknown sections or keys and
// malformed values are reported with line numbers; parsing continues so
// every problem is listed.
ExperimentConfig parse_config(const std::string& text, ConfigDiagnostics& diag);

// Semantic checks, exhaustive rather than first-failure.  Violations of
// hard constraints (bistability, grid sizes, monotone intensity grid)
// land in errors; exponent-window violations land in warnings.
void validate_config(const ExperimentConfig& cfg, ConfigDiagnostics& diag);

// Environment override for the master seed; invalid values are errors.
extern const char* const kSeedEnvVar;  // CHAFEE_MASTER_SEED
void apply_env_overrides(ExperimentConfig& cfg, ConfigDiagnostics& diag);

// Read + parse + env override + validate.
ExperimentConfig load_config_file(const std::string& path, ConfigDiagnostics& diag);

// Canonical rendering: fixed section/key order, shortest round-trip
// numbers.  parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const ExperimentConfig& cfg);

// FNV-1a over the canonical rendering of the numeric sections (the io
// section is excluded so output paths do not invalidate artifacts).
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string config_hash_hex(const ExperimentConfig& cfg);

// Noise directions named by the config, with configured weights applied.
// phi_plus is only consulted for the equilibrium direction set.
NoiseSpec build_noise(const ExperimentConfig& cfg, const SineBasis& basis,
                      const SpectralField& phi_plus);

}  // namespace chafee
