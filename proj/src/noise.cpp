#include "chafee/noise.hpp"

#include <cmath>
#include <cstdio>

namespace chafee {

double NoiseSpec::total_weight() const {
    double s = 0.0;
    for (const auto& d : dirs) s += d.weight;
    return s;
}

std::vector<std::string> NoiseSpec::validate(const SineBasis& basis) const {
    std::vector<std::string> bad;
    if (!(alpha > 0.0 && alpha < 2.0))
        bad.push_back("alpha must lie in (0,2)");
    if (!(r_min > 0.0)) bad.push_back("r_min must be positive");
    if (dirs.empty()) bad.push_back("at least one jump direction required");
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        if (!(dirs[i].weight > 0.0))
            bad.push_back("direction " + std::to_string(i) + " has non-positive weight");
        double h = dirs[i].v.h_norm();
        if (std::abs(h - 1.0) > 1e-9)
            bad.push_back("direction " + std::to_string(i) + " is not H-unit (norm " +
                          std::to_string(h) + ")");
    }
    // symmetry: every direction needs a mirror with matching weight
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        bool found = false;
        for (std::size_t j = 0; j < dirs.size(); ++j) {
            SpectralField s = dirs[i].v + dirs[j].v;
            if (s.h_norm() < 1e-9 && std::abs(dirs[i].weight - dirs[j].weight) < 1e-12) {
                found = true;
                break;
            }
        }
        if (!found)
            bad.push_back("direction " + std::to_string(i) +
                          " lacks a mirrored partner of equal weight");
    }
    (void)basis;
    return bad;
}

namespace {
NoiseSpec from_profile(double alpha, const SpectralField& profile,
                       const SineBasis& basis, double r_min) {
    NoiseSpec spec;
    spec.alpha = alpha;
    spec.r_min = r_min;
    SpectralField v = profile;
    v *= 1.0 / v.h_norm();
    NoiseSpec::Direction plus{v, 0.5, basis.sup_norm(v)};
    SpectralField vm = -1.0 * v;
    NoiseSpec::Direction minus{vm, 0.5, basis.sup_norm(vm)};
    spec.dirs = {plus, minus};
    return spec;
}
}  // namespace

NoiseSpec make_first_mode_noise(double alpha, const SineBasis& basis, double r_min) {
    SpectralField e1((std::size_t)basis.n_modes());
    e1[0] = 1.0;
    return from_profile(alpha, e1, basis, r_min);
}

NoiseSpec make_equilibrium_noise(double alpha, const SpectralField& phi,
                                 const SineBasis& basis, double r_min) {
    return from_profile(alpha, phi, basis, r_min);
}

HypothesisReport check_hypotheses(double alpha, const ScalingParams& s) {
    HypothesisReport rep;
    rep.theta_hi = (2.0 - alpha) / (2.0 * alpha);
    rep.rho_lo = 0.5;
    rep.rho_hi = (2.0 - alpha) / (2.0 - (1.0 - s.theta) * alpha);
    rep.gamma_hi = ((2.0 - alpha) * (1.0 - s.rho) - s.theta * alpha * s.rho) /
                   (2.0 * (s.big_gamma + 2.0));

    char buf[160];
    if (!(s.theta > 0.0 && s.theta < rep.theta_hi)) {
        std::snprintf(buf, sizeof buf,
                      "theta=%g outside (0, %.6g) (tight variant of the admissibility chain)",
                      s.theta, rep.theta_hi);
        rep.warnings.push_back(buf);
    }
    if (!(s.rho > rep.rho_lo && s.rho < rep.rho_hi)) {
        std::snprintf(buf, sizeof buf, "rho=%g outside (0.5, %.6g)", s.rho, rep.rho_hi);
        rep.warnings.push_back(buf);
    }
    if (!(s.gamma > 0.0 && s.gamma < rep.gamma_hi)) {
        std::snprintf(buf, sizeof buf,
                      "gamma=%g outside (0, %.6g); asymptotic guarantees do not apply "
                      "at this margin, statistics remain usable",
                      s.gamma, rep.gamma_hi);
        rep.warnings.push_back(buf);
    }
    rep.ok = rep.warnings.empty();
    return rep;
}

double large_jump_rate(const NoiseSpec& spec, double eps, double rho) {
    // nu({r > eps^-rho}) per direction is w_i (eps^-rho)^-alpha
    return spec.total_weight() * std::pow(eps, spec.alpha * rho);
}

double small_jump_rate(const NoiseSpec& spec, int dir, double eps, double rho) {
    double hi = std::pow(eps, -rho);
    if (hi <= spec.r_min) return 0.0;
    return spec.dirs[dir].weight *
           (std::pow(spec.r_min, -spec.alpha) - std::pow(hi, -spec.alpha));
}

Jump sample_large_jump(const NoiseSpec& spec, double eps, double rho, Stream& rng) {
    double cum[16];
    int n = (int)spec.dirs.size();
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += spec.dirs[i].weight;
        cum[i] = acc;
    }
    Jump j;
    j.dir = rng.pick(cum, n);
    j.r = rng.pareto(spec.alpha, std::pow(eps, -rho));
    return j;
}

long add_small_increments(const NoiseSpec& spec, double eps, double rho,
                          double dt, double eps_scale, SpectralField& into,
                          Stream& rng) {
    double hi = std::pow(eps, -rho);
    long total = 0;
    for (std::size_t i = 0; i < spec.dirs.size(); ++i) {
        double rate = small_jump_rate(spec, (int)i, eps, rho);
        if (rate <= 0.0) continue;
        long n = rng.poisson(rate * dt);
        if (n == 0) continue;
        total += n;
        double sum_r = 0.0;
        for (long k = 0; k < n; ++k)
            sum_r += rng.pareto_truncated(spec.alpha, spec.r_min, hi);
        double c = eps_scale * sum_r;
        const SpectralField& v = spec.dirs[i].v;
        for (std::size_t m = 0; m < into.modes(); ++m) into[m] += c * v[m];
    }
    return total;
}

}  // namespace chafee
