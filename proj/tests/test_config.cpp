#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <string>

#include "chafee/config.hpp"

using namespace chafee;

namespace {

const char* kMinimal =
    "[model]\n"
    "lambda = 20\n"
    "[scaling]\n"
    "epsilon_grid = 0.0625, 0.03125\n";

ExperimentConfig parse_ok(const std::string& text) {
    ConfigDiagnostics diag;
    ExperimentConfig cfg = parse_config(text, diag);
    REQUIRE(diag.errors.empty());
    return cfg;
}

bool mentions(const std::vector<std::string>& msgs, const std::string& needle) {
    for (const auto& m : msgs)
        if (m.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("minimal file parses onto defaults") {
    ExperimentConfig cfg = parse_ok(kMinimal);
    CHECK(cfg.model.lambda == 20.0);
    CHECK(cfg.model.n_modes == 32);
    CHECK(cfg.noise.alpha == 1.5);
    CHECK(cfg.scaling.epsilon_grid == std::vector<double>{0.0625, 0.03125});
    CHECK(cfg.mc.theta_grid == std::vector<double>{0.5, 1.0, 2.0});
    CHECK(cfg.io.out_dir == "out");
}

TEST_CASE("comments, blank lines, and key aliases") {
    ExperimentConfig cfg = parse_ok(
        "# heading comment\n"
        "\n"
        "[scaling]\n"
        "; alt comment style\n"
        "Theta = 0.05\n"
        "Gamma_cap = 2.5\n"
        "epsilon_grid = 0.5\n");
    CHECK(cfg.scaling.theta == 0.05);
    CHECK(cfg.scaling.gamma_cap == 2.5);
}

TEST_CASE("parse errors carry line numbers and do not stop the scan") {
    ConfigDiagnostics diag;
    parse_config(
        "[model]\n"
        "lambda = abc\n"
        "[nosuch]\n"
        "x = 1\n"
        "[mc]\n"
        "bogus_key = 3\n"
        "n_paths = 7\n",
        diag);
    REQUIRE(diag.errors.size() >= 3);
    CHECK(mentions(diag.errors, "line 2"));
    CHECK(mentions(diag.errors, "line 3"));
    CHECK(mentions(diag.errors, "line 6"));
}

TEST_CASE("keys before any section are rejected") {
    ConfigDiagnostics diag;
    parse_config("lambda = 20\n", diag);
    CHECK_FALSE(diag.ok());
    CHECK(mentions(diag.errors, "line 1"));
}

TEST_CASE("boolean forms") {
    ExperimentConfig cfg = parse_ok(
        "[io]\n"
        "dump_trajectories = yes\n");
    CHECK(cfg.io.dump_trajectories);
    ConfigDiagnostics diag;
    parse_config("[io]\ndump_trajectories = maybe\n", diag);
    CHECK_FALSE(diag.ok());
}

TEST_CASE("reaction strength below the first bifurcation is a hard error") {
    ExperimentConfig cfg = parse_ok(kMinimal);
    cfg.model.lambda = 9.0;  // below pi^2 ~ 9.8696: single stable state
    ConfigDiagnostics diag;
    validate_config(cfg, diag);
    CHECK_FALSE(diag.ok());
    CHECK(mentions(diag.errors, "lambda"));
}

TEST_CASE("exponent window violations warn instead of failing") {
    ExperimentConfig cfg = parse_ok(kMinimal);
    // alpha = 1.5 puts the auxiliary-exponent ceiling at (2-1.5)/3
    cfg.scaling.theta = 0.1;
    {
        ConfigDiagnostics diag;
        validate_config(cfg, diag);
        CHECK(diag.ok());
        CHECK_FALSE(mentions(diag.warnings, "theta"));
    }
    cfg.scaling.theta = 0.2;  // above 0.1667
    {
        ConfigDiagnostics diag;
        validate_config(cfg, diag);
        CHECK(diag.ok());
        CHECK(mentions(diag.warnings, "theta"));
    }
}

TEST_CASE("validation reports every problem at once") {
    ExperimentConfig cfg = parse_ok(kMinimal);
    cfg.noise.alpha = 2.5;
    cfg.noise.r_min = 0.0;
    cfg.mc.n_paths = -1;
    cfg.mc.probe_count = 3;
    cfg.scaling.epsilon_grid = {0.5, 0.5};
    ConfigDiagnostics diag;
    validate_config(cfg, diag);
    CHECK(diag.errors.size() >= 5);
    CHECK(mentions(diag.errors, "alpha"));
    CHECK(mentions(diag.errors, "r_min"));
    CHECK(mentions(diag.errors, "n_paths"));
    CHECK(mentions(diag.errors, "probe_count"));
    CHECK(mentions(diag.errors, "epsilon_grid"));
}

TEST_CASE("intensity grid must be strictly decreasing inside (0,1)") {
    ExperimentConfig cfg = parse_ok(kMinimal);
    for (auto bad : {std::vector<double>{}, std::vector<double>{1.5},
                     std::vector<double>{0.03125, 0.0625}}) {
        cfg.scaling.epsilon_grid = bad;
        ConfigDiagnostics diag;
        validate_config(cfg, diag);
        CHECK_FALSE(diag.ok());
    }
}

TEST_CASE("direction weights must be a positive equal pair") {
    ExperimentConfig cfg = parse_ok(kMinimal);
    cfg.noise.weights = {0.7, 0.3};
    ConfigDiagnostics diag;
    validate_config(cfg, diag);
    CHECK_FALSE(diag.ok());
    CHECK(mentions(diag.errors, "weights"));
}

TEST_CASE("serialize and reparse round-trips every field") {
    ExperimentConfig cfg = parse_ok(kMinimal);
    cfg.model.dt = 2e-3;
    cfg.noise.alpha = 0.8;
    cfg.noise.weights = {0.5, 0.5};
    cfg.scaling.gamma = 0.35;
    cfg.mc.master_seed = 987654321;
    cfg.mc.theta_grid = {0.25, 1.25};
    cfg.io.dump_trajectories = true;

    ConfigDiagnostics diag;
    ExperimentConfig back = parse_config(serialize_config(cfg), diag);
    REQUIRE(diag.ok());
    CHECK(back.model.dt == cfg.model.dt);
    CHECK(back.noise.alpha == cfg.noise.alpha);
    CHECK(back.noise.weights == cfg.noise.weights);
    CHECK(back.scaling.gamma == cfg.scaling.gamma);
    CHECK(back.mc.master_seed == cfg.mc.master_seed);
    CHECK(back.mc.theta_grid == cfg.mc.theta_grid);
    CHECK(back.io.dump_trajectories == cfg.io.dump_trajectories);
    CHECK(serialize_config(back) == serialize_config(cfg));
}

TEST_CASE("config hash ignores io but tracks the science sections") {
    ExperimentConfig a = parse_ok(kMinimal);
    ExperimentConfig b = a;
    b.io.out_dir = "elsewhere";
    b.io.dump_trajectories = true;
    CHECK(config_hash(a) == config_hash(b));

    ExperimentConfig c = a;
    c.model.lambda = 21.0;
    CHECK(config_hash(a) != config_hash(c));

    ExperimentConfig d = a;
    d.mc.master_seed += 1;
    CHECK(config_hash(a) != config_hash(d));

    CHECK(config_hash_hex(a).size() == 16);
}

TEST_CASE("environment variable overrides the master seed") {
    ExperimentConfig cfg = parse_ok(kMinimal);
    cfg.mc.master_seed = 5;

    unsetenv(kSeedEnvVar);
    {
        ConfigDiagnostics diag;
        apply_env_overrides(cfg, diag);
        CHECK(cfg.mc.master_seed == 5);
        CHECK(diag.warnings.empty());
    }
    setenv(kSeedEnvVar, "12345", 1);
    {
        ConfigDiagnostics diag;
        apply_env_overrides(cfg, diag);
        CHECK(cfg.mc.master_seed == 12345);
        CHECK_FALSE(diag.warnings.empty());
    }
    setenv(kSeedEnvVar, "not-a-seed", 1);
    {
        ConfigDiagnostics diag;
        apply_env_overrides(cfg, diag);
        CHECK_FALSE(diag.ok());
    }
    unsetenv(kSeedEnvVar);
}

TEST_CASE("named direction families are constructed with configured weights") {
    ExperimentConfig cfg = parse_ok(kMinimal);
    SineBasis basis(cfg.model.n_modes, cfg.model.grid_points);
    SpectralField phi(cfg.model.n_modes);
    phi[0] = 0.5;

    NoiseSpec first = build_noise(cfg, basis, phi);
    REQUIRE(first.dirs.size() == 2);
    // unit-H first-mode profile: coefficient 1/pi, mirrored pair
    CHECK(first.dirs[0].v[0] == doctest::Approx(1.0 / M_PI).epsilon(1e-15));
    CHECK(first.dirs[1].v[0] == doctest::Approx(-1.0 / M_PI).epsilon(1e-15));
    CHECK(first.dirs[0].weight == 0.5);

    cfg.noise.directions = "equilibrium";
    cfg.noise.weights = {0.25, 0.25};
    NoiseSpec eq = build_noise(cfg, basis, phi);
    REQUIRE(eq.dirs.size() == 2);
    CHECK(eq.dirs[0].v.h_norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eq.dirs[0].weight == 0.25);
}
