#include "chafee/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace chafee {

namespace {

// Dense LU solve with partial pivoting; systems here are 32x32.
bool lu_solve(std::vector<double>& a, std::vector<double>& b, int n) {
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int c = 0; c < n; ++c) {
        int pr = c;
        double pm = std::abs(a[(std::size_t)c * n + c]);
        for (int r = c + 1; r < n; ++r) {
            double m = std::abs(a[(std::size_t)r * n + c]);
            if (m > pm) { pm = m; pr = r; }
        }
        if (pm < 1e-14) return false;
        if (pr != c) {
            for (int j = 0; j < n; ++j)
                std::swap(a[(std::size_t)c * n + j], a[(std::size_t)pr * n + j]);
            std::swap(b[c], b[pr]);
        }
        double d = a[(std::size_t)c * n + c];
        for (int r = c + 1; r < n; ++r) {
            double f = a[(std::size_t)r * n + c] / d;
            if (f == 0.0) continue;
            a[(std::size_t)r * n + c] = 0.0;
            for (int j = c + 1; j < n; ++j)
                a[(std::size_t)r * n + j] -= f * a[(std::size_t)c * n + j];
            b[r] -= f * b[c];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int j = r + 1; j < n; ++j) s -= a[(std::size_t)r * n + j] * b[j];
        b[r] = s / a[(std::size_t)r * n + r];
    }
    return true;
}

double defect_h_norm(const Dynamics& dyn, const SpectralField& x, SpectralField& g) {
    dyn.nonlinearity(x, g);
    for (int k = 0; k < (int)x.modes(); ++k) g[k] -= dyn.linear_rate(k) * x[k];
    return g.h_norm();
}

}  // namespace

double equilibrium_residual(const Dynamics& dyn, const SpectralField& x) {
    SpectralField g((int)x.modes());
    return defect_h_norm(dyn, x, g);
}

NewtonResult newton_equilibrium(const Dynamics& dyn, const SpectralField& seed,
                                double tol, int max_iter) {
    const int n = dyn.params().n_modes;
    const int m = dyn.params().grid_points;
    const double lam = dyn.params().lambda;
    const SineBasis& basis = dyn.basis();

    NewtonResult res;
    res.x = seed;
    SpectralField g(n);
    std::vector<double> jac((std::size_t)n * n), rhs(n), ugrid;

    for (int it = 0; it < max_iter; ++it) {
        res.residual = defect_h_norm(dyn, res.x, g);
        res.iterations = it;
        if (res.residual < tol) {
            res.converged = true;
            return res;
        }
        basis.eval(res.x, ugrid);
        // J_kl = (-lam_k + lambda) delta_kl - 3 lambda/(M+1) sum_j E_jk u_j^2 E_jl
        const double scale = -3.0 * lam / (double)(m + 1);
        for (int k = 0; k < n; ++k) {
            const double* ck = basis.column(k);
            for (int l = k; l < n; ++l) {
                const double* cl = basis.column(l);
                double s = 0.0;
                for (int j = 0; j < m; ++j) s += ck[j] * ugrid[j] * ugrid[j] * cl[j];
                double v = scale * s;
                jac[(std::size_t)k * n + l] = v;
                jac[(std::size_t)l * n + k] = v;
            }
            jac[(std::size_t)k * n + k] += -dyn.linear_rate(k) + lam;
        }
        for (int k = 0; k < n; ++k) rhs[k] = -g[k];
        if (!lu_solve(jac, rhs, n)) break;
        for (int k = 0; k < n; ++k) res.x[k] += rhs[k];
    }
    res.residual = defect_h_norm(dyn, res.x, g);
    res.converged = res.residual < tol;
    return res;
}

EquilibriumSet find_equilibria(const Dynamics& dyn, double tol) {
    const int n = dyn.params().n_modes;
    std::vector<SpectralField> seeds;
    seeds.emplace_back(n);
    for (double c : {0.1, 0.5, 1.0}) {
        SpectralField s(n);
        s[0] = c;
        seeds.push_back(s);
        s[0] = -c;
        seeds.push_back(s);
    }

    EquilibriumSet set;
    for (const auto& s : seeds) {
        NewtonResult r = newton_equilibrium(dyn, s, tol);
        if (!r.converged) continue;
        bool dup = false;
        for (const auto& kept : set.all) {
            SpectralField d = r.x - kept.x;
            if (d.h_norm() < 1e-6) { dup = true; break; }
        }
        if (!dup) set.all.push_back(std::move(r));
    }

    double best_mean = 0.0;
    const NewtonResult* plus = nullptr;
    for (const auto& r : set.all) {
        double m = mean_value(r.x);
        if (m > best_mean) { best_mean = m; plus = &r; }
    }
    if (plus) {
        set.phi_plus = plus->x;
        set.phi_minus = -1.0 * plus->x;  // mirror symmetry of the reaction
    }
    set.zero = SpectralField(n);
    return set;
}

std::optional<double> time_to_reach(const Dynamics& dyn, const SpectralField& x,
                                    const SpectralField& target, double tol,
                                    double t_cap) {
    SpectralField y = x;
    const double dt = dyn.params().dt;
    double t = 0.0;
    while (t <= t_cap + 1e-12) {
        if (dyn.basis().sup_dist(y, target) <= tol) return t;
        dyn.step(y);
        t += dt;
    }
    return std::nullopt;
}

RelaxationFit fit_relaxation(const Dynamics& dyn, const SpectralField& phi,
                             double gamma, const std::vector<double>& eps_grid) {
    const int n = dyn.params().n_modes;
    std::vector<SpectralField> starts;
    starts.push_back(0.2 * phi);
    starts.push_back(1.4 * phi);
    {
        // phi plus a second-mode bump of sup height 0.3
        SpectralField bump = phi;
        if (n >= 2) bump[1] += 0.3 / std::numbers::sqrt2;
        starts.push_back(bump);
    }

    RelaxationFit fit;
    for (double eps : eps_grid) {
        double tol = 0.5 * std::pow(eps, 2.0 * gamma);
        double worst = 0.0;
        for (const auto& s : starts) {
            auto t = time_to_reach(dyn, s, phi, tol, dyn.params().t_max);
            if (t) worst = std::max(worst, *t);
        }
        fit.eps.push_back(eps);
        fit.t.push_back(worst);
    }

    // least squares of t against gamma |ln eps|
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = (int)fit.eps.size();
    for (int i = 0; i < m; ++i) {
        double x = gamma * std::abs(std::log(fit.eps[i]));
        sx += x;
        sy += fit.t[i];
        sxx += x * x;
        sxy += x * fit.t[i];
    }
    double den = m * sxx - sx * sx;
    if (std::abs(den) > 1e-14) {
        fit.kappa = (m * sxy - sx * sy) / den;
        fit.t_rec = (sy - fit.kappa * sx) / m;
    }
    return fit;
}

}  // namespace chafee
