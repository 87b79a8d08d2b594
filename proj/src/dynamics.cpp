#include "chafee/dynamics.hpp"

#include <cmath>
#include <numbers>

namespace chafee {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kBlowup = 1e6;

// g1(z) = (1 - e^-z)/z,  g2(z) = (e^-z - 1 + z)/z^2, stable near z = 0.
double g1(double z) {
    if (z < 1e-4) return 1.0 - z / 2.0 + z * z / 6.0;
    return (1.0 - std::exp(-z)) / z;
}
double g2(double z) {
    if (z < 1e-4) return 0.5 - z / 6.0 + z * z / 24.0;
    return (std::exp(-z) - 1.0 + z) / (z * z);
}
}  // namespace

std::vector<std::string> ModelParams::validate() const {
    std::vector<std::string> bad;
    if (!(lambda > 0.0)) bad.push_back("lambda must be positive");
    if (lambda <= kPi * kPi)
        bad.push_back("lambda must exceed pi^2 for a bistable reaction");
    if (n_modes < 1) bad.push_back("n_modes must be at least 1");
    if (!(dt > 0.0)) bad.push_back("dt must be positive");
    if (!(t_max > 0.0)) bad.push_back("t_max must be positive");
    if (grid_points < 3 * n_modes)
        bad.push_back("grid_points must be at least 3*n_modes to keep cubic projections exact");
    for (int k = 1; k <= n_modes; ++k) {
        double ev = (double)k * kPi * (double)k * kPi;
        if (std::abs(lambda - ev) <= 1e-9 * ev)
            bad.push_back("lambda coincides with linearization eigenvalue (k=" +
                          std::to_string(k) + "); equilibria become degenerate");
    }
    return bad;
}

Dynamics::Dynamics(ModelParams p)
    : p_(p), basis_(p.n_modes, p.grid_points), lin_(p.n_modes) {
    for (int k = 0; k < p_.n_modes; ++k) {
        double kp = (double)(k + 1) * kPi;
        lin_[k] = kp * kp;
    }
    make_factors(p_.dt, base_);
    grid_.resize(p_.grid_points);
    fgrid_.resize(p_.grid_points);
    fa_ = SpectralField(p_.n_modes);
    stage_ = SpectralField(p_.n_modes);
    fs_ = SpectralField(p_.n_modes);
}

void Dynamics::make_factors(double dt, StepFactors& f) const {
    f.dt = dt;
    f.decay.resize(p_.n_modes);
    f.f1.resize(p_.n_modes);
    f.f2.resize(p_.n_modes);
    for (int k = 0; k < p_.n_modes; ++k) {
        double z = lin_[k] * dt;
        f.decay[k] = std::exp(-z);
        f.f1[k] = dt * g1(z);
        f.f2[k] = dt * g2(z);
    }
}

SpectralField Dynamics::semigroup(const SpectralField& x, double t) const {
    if (t < 0.0) throw std::invalid_argument("semigroup requires t >= 0");
    SpectralField y = x;
    for (int k = 0; k < (int)y.modes(); ++k) y[k] *= std::exp(-lin_[k] * t);
    return y;
}

void Dynamics::nonlinearity(const SpectralField& x, SpectralField& out) const {
    basis_.eval(x, grid_);
    const double lam = p_.lambda;
    for (int j = 0; j < p_.grid_points; ++j)
        fgrid_[j] = reaction(grid_[j], lam);
    basis_.project(fgrid_, out);
}

SpectralField Dynamics::nonlinearity(const SpectralField& x) const {
    SpectralField f;
    nonlinearity(x, f);
    return f;
}

void Dynamics::check_finite(const SpectralField& x) const {
    for (double c : x.coeffs)
        if (!std::isfinite(c) || std::abs(c) > kBlowup)
            throw IntegrationError("state left the resolvable range (|a_k| > 1e6)");
}

void Dynamics::step_with(SpectralField& x, const StepFactors& f) const {
    nonlinearity(x, fa_);
    for (int k = 0; k < p_.n_modes; ++k)
        x[k] = f.decay[k] * x[k] + f.f1[k] * fa_[k];
    check_finite(x);
}

void Dynamics::step2_with(SpectralField& x, const StepFactors& f) const {
    nonlinearity(x, fa_);
    for (int k = 0; k < p_.n_modes; ++k)
        stage_[k] = f.decay[k] * x[k] + f.f1[k] * fa_[k];
    nonlinearity(stage_, fs_);
    for (int k = 0; k < p_.n_modes; ++k)
        x[k] = stage_[k] + f.f2[k] * (fs_[k] - fa_[k]);
    check_finite(x);
}

void Dynamics::step(SpectralField& x) const { step_with(x, base_); }

void Dynamics::step(SpectralField& x, double dt) const {
    if (custom_.dt != dt) make_factors(dt, custom_);
    step_with(x, custom_);
}

void Dynamics::step_stabilized(SpectralField& x, double dt, double sup_hint) const {
    constexpr double kCalm = 1.5;  // amplitude below which plain steps are stable
    double s = sup_hint;
    if (s <= 0.0) s = basis_.sup_norm(x);
    double rem = dt;
    int guard = 0;
    while (s > kCalm && rem > 0.0) {
        const double dts = 0.5 / (3.0 * p_.lambda * s * s);
        if (dts >= rem) {
            step(x, rem);
            rem = 0.0;
        } else {
            step(x, dts);
            rem -= dts;
        }
        // grid_ holds the samples taken at the start of that substep;
        // amplitudes only shrink here, so the lagged sup is conservative.
        double m = 0.0;
        for (double v : grid_) m = std::max(m, std::abs(v));
        s = m;
        if (++guard > 200000)
            throw IntegrationError("stabilized step failed to contract the state");
    }
    if (rem > 0.0) {
        if (rem == p_.dt) step(x);
        else step(x, rem);
    }
}

void Dynamics::flow_inplace(SpectralField& x, double t) const {
    if (t < 0.0) throw std::invalid_argument("flow requires t >= 0");
    const double dt = p_.dt;
    long n = (long)(t / dt + 1e-9);
    for (long i = 0; i < n; ++i) step_with(x, base_);
    double rem = t - (double)n * dt;
    if (rem > 1e-12) step(x, rem);
}

SpectralField Dynamics::flow(const SpectralField& x, double t) const {
    SpectralField y = x;
    flow_inplace(y, t);
    return y;
}

SpectralField Dynamics::flow_refined(const SpectralField& x, double t, double dt) const {
    StepFactors f;
    make_factors(dt, f);
    SpectralField y = x;
    long n = (long)(t / dt + 1e-9);
    for (long i = 0; i < n; ++i) step2_with(y, f);
    double rem = t - (double)n * dt;
    if (rem > 1e-12) {
        make_factors(rem, f);
        step2_with(y, f);
    }
    return y;
}

double Dynamics::energy(const SpectralField& x) const {
    double grad2 = 0.0, l2 = 0.0;
    for (int k = 0; k < (int)x.modes(); ++k) {
        grad2 += lin_[k] * x[k] * x[k];
        l2 += x[k] * x[k];
    }
    basis_.eval(x, grid_);
    double quart = 0.0;
    for (double v : grid_) quart += v * v * v * v;
    quart /= (double)(p_.grid_points + 1);  // trapezoid, boundary terms vanish
    return 0.5 * grad2 + p_.lambda * (0.25 * quart - 0.5 * l2);
}

}  // namespace chafee
