#pragma once

#include <string>
#include <vector>

#include "chafee/exit_mc.hpp"

namespace chafee {

// Sample mean with a leave-one-out (jackknife) standard error.
struct LaplaceEstimate {
    double theta = 0.0;
    double value = 0.0;
    double se = 0.0;
    int n = 0;
};

// Mean of exp(-theta * x) over the samples.  theta > -1 keeps the
// transform finite for exponentially distributed inputs.
LaplaceEstimate laplace_estimate(const std::vector<double>& samples, double theta);

// Two-sided Kolmogorov-Smirnov distance between the empirical CDF of
// `samples` and the unit-rate exponential CDF 1 - exp(-t).
double ks_exponential(std::vector<double> samples);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Ordinary least squares of y against x.  Requires >= 2 points.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Least squares of ln(mean) against ln(eps); the slope estimates the
// exponent of a power law mean ~ c * eps^slope.  Requires >= 3 points
// with positive coordinates.
LinearFit fit_power_law(const std::vector<std::pair<double, double>>& points);

// Per-intensity slice of an ensemble.
struct SliceSummary {
    double epsilon = 0.0;
    int n_total = 0;          // records at this intensity
    int n = 0;                // uncensored records
    double censor_fraction = 0.0;
    double mean_tau = 0.0;
    double se_tau = 0.0;
    double rate = 0.0;        // characteristic exit rate used for normalization
    double mean_normalized = 0.0;
    double ks = 1.0;          // KS distance of normalized times vs Exp(1)
    double mean_jumps = 0.0;  // average large-jump count per path
    std::vector<LaplaceEstimate> laplace;
};

struct EnsembleSummary {
    std::vector<SliceSummary> slices;  // sorted by decreasing epsilon
    LinearFit scaling;                 // ln(mean tau) vs ln(eps); slope ~ -alpha
    bool scaling_valid = false;
};

// Groups records by intensity and computes the slice statistics above.
// Censored records count toward censor_fraction only.  theta_grid holds
// the Laplace evaluation points.  Intensities listed in eps_grid but
// absent from the records still get a slice with n = 0 and NaN moments.
EnsembleSummary summarize_records(const std::vector<ExitRecord>& records,
                                  const std::vector<double>& theta_grid,
                                  const std::vector<double>& eps_grid = {});

// Key = value rendering, one statistic per line, suitable for logs.
std::string summary_text(const EnsembleSummary& summary);

// CSV rendering, one row per intensity; columns:
// epsilon,n,censor_fraction,mean_tau,se_tau,rate,mean_normalized,ks,
// laplace_<theta>...
std::string summary_table(const EnsembleSummary& summary);

}  // namespace chafee
