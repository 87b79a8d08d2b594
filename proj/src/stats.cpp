#include "chafee/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>

namespace chafee {

LaplaceEstimate laplace_estimate(const std::vector<double>& samples, double theta) {
    if (samples.empty()) throw std::invalid_argument("laplace_estimate: empty sample");
    if (theta <= -1.0) throw std::invalid_argument("laplace_estimate: theta must exceed -1");
    const int n = static_cast<int>(samples.size());
    std::vector<double> g(samples.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        g[i] = std::exp(-theta * samples[i]);
        sum += g[i];
    }
    LaplaceEstimate est;
    est.theta = theta;
    est.n = n;
    est.value = sum / n;
    if (n > 1) {
        // Leave-one-out means; for the plain mean this reduces to the
        // classical se but is written as a jackknife so the same code
        // covers future smooth statistics.
        double ss = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double loo = (sum - g[i]) / (n - 1);
            const double d = loo - est.value;
            ss += d * d;
        }
        est.se = std::sqrt(ss * (n - 1.0) / n);
    }
    return est;
}

double ks_exponential(std::vector<double> samples) {
    if (samples.empty()) throw std::invalid_argument("ks_exponential: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double cdf = 1.0 - std::exp(-samples[i]);
        const double lo = static_cast<double>(i) / n;        // CDF just before the jump
        const double hi = static_cast<double>(i + 1) / n;    // CDF just after
        d = std::max(d, std::max(cdf - lo, hi - cdf));
    }
    return d;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("linear_fit: size mismatch");
    if (x.size() < 2) throw std::invalid_argument("linear_fit: need at least two points");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0) throw std::invalid_argument("linear_fit: degenerate abscissae");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = (syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

LinearFit fit_power_law(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw std::invalid_argument("fit_power_law: need at least three points");
    std::vector<double> lx, ly;
    lx.reserve(points.size());
    ly.reserve(points.size());
    for (const auto& [eps, mean] : points) {
        if (eps <= 0.0 || mean <= 0.0)
            throw std::invalid_argument("fit_power_law: coordinates must be positive");
        lx.push_back(std::log(eps));
        ly.push_back(std::log(mean));
    }
    return linear_fit(lx, ly);
}

EnsembleSummary summarize_records(const std::vector<ExitRecord>& records,
                                  const std::vector<double>& theta_grid,
                                  const std::vector<double>& eps_grid) {
    std::map<double, std::vector<const ExitRecord*>, std::greater<double>> groups;
    for (double eps : eps_grid) groups[eps];
    for (const auto& rec : records) groups[rec.epsilon].push_back(&rec);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    EnsembleSummary summary;
    std::vector<std::pair<double, double>> scaling_points;
    for (const auto& [eps, recs] : groups) {
        SliceSummary s;
        s.epsilon = eps;
        s.n_total = static_cast<int>(recs.size());
        if (recs.empty()) {
            s.censor_fraction = 0.0;
            s.mean_tau = s.se_tau = s.rate = s.mean_normalized = s.ks = nan;
            for (double theta : theta_grid)
                s.laplace.push_back({theta, nan, nan, 0});
            summary.slices.push_back(std::move(s));
            continue;
        }
        std::vector<double> tau, norm;
        double jumps = 0.0;
        for (const ExitRecord* r : recs) {
            jumps += static_cast<double>(r->n_large_jumps);
            if (s.rate == 0.0 && r->tau > 0.0) s.rate = r->normalized_tau / r->tau;
            if (r->cause == ExitCause::Censored) continue;
            tau.push_back(r->tau);
            norm.push_back(r->normalized_tau);
        }
        s.n = static_cast<int>(tau.size());
        s.censor_fraction = 1.0 - static_cast<double>(s.n) / s.n_total;
        s.mean_jumps = jumps / s.n_total;
        if (s.n > 0) {
            double sum = 0.0, nsum = 0.0;
            for (double t : tau) sum += t;
            for (double t : norm) nsum += t;
            s.mean_tau = sum / s.n;
            s.mean_normalized = nsum / s.n;
            if (s.n > 1) {
                double ss = 0.0;
                for (double t : tau) ss += (t - s.mean_tau) * (t - s.mean_tau);
                s.se_tau = std::sqrt(ss / (s.n - 1.0) / s.n);
            }
            s.ks = ks_exponential(norm);
            for (double theta : theta_grid) s.laplace.push_back(laplace_estimate(norm, theta));
            if (s.mean_tau > 0.0) scaling_points.emplace_back(eps, s.mean_tau);
        } else {
            // Everything censored: report the fraction, no moments.
            s.mean_tau = s.se_tau = s.mean_normalized = s.ks = nan;
            for (double theta : theta_grid) s.laplace.push_back({theta, nan, nan, 0});
        }
        summary.slices.push_back(std::move(s));
    }
    if (scaling_points.size() >= 3) {
        summary.scaling = fit_power_law(scaling_points);
        summary.scaling_valid = true;
    }
    return summary;
}

namespace {

void kv(std::string& out, const char* key, double value) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s = %.10g\n", key, value);
    out += buf;
}

}  // namespace

std::string summary_text(const EnsembleSummary& summary) {
    std::string out;
    char buf[160];
    for (const auto& s : summary.slices) {
        std::snprintf(buf, sizeof(buf), "[epsilon = %.10g]\n", s.epsilon);
        out += buf;
        kv(out, "n_paths", s.n_total);
        kv(out, "n_uncensored", s.n);
        kv(out, "censor_fraction", s.censor_fraction);
        kv(out, "mean_exit_time", s.mean_tau);
        kv(out, "se_exit_time", s.se_tau);
        kv(out, "characteristic_rate", s.rate);
        kv(out, "mean_normalized_time", s.mean_normalized);
        kv(out, "ks_vs_exp1", s.ks);
        kv(out, "mean_large_jumps", s.mean_jumps);
        for (const auto& l : s.laplace) {
            std::snprintf(buf, sizeof(buf), "laplace[%.10g] = %.10g +- %.10g\n", l.theta,
                          l.value, l.se);
            out += buf;
        }
        out += "\n";
    }
    if (summary.scaling_valid) {
        out += "[scaling]\n";
        kv(out, "log_log_slope", summary.scaling.slope);
        kv(out, "log_log_intercept", summary.scaling.intercept);
        kv(out, "r_squared", summary.scaling.r2);
    }
    return out;
}

std::string summary_table(const EnsembleSummary& summary) {
    std::string out = "epsilon,n,censor_fraction,mean_tau,se_tau,rate,mean_normalized,ks";
    if (!summary.slices.empty()) {
        for (const auto& l : summary.slices.front().laplace) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), ",laplace_%.6g", l.theta);
            out += buf;
        }
    }
    out += "\n";
    for (const auto& s : summary.slices) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%.17g,%d,%.6g,%.17g,%.17g,%.17g,%.17g,%.6g",
                      s.epsilon, s.n, s.censor_fraction, s.mean_tau, s.se_tau, s.rate,
                      s.mean_normalized, s.ks);
        out += buf;
        for (const auto& l : s.laplace) {
            std::snprintf(buf, sizeof(buf), ",%.10g", l.value);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

}  // namespace chafee
