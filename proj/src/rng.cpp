#include "chafee/rng.hpp"

namespace chafee {

long Stream::poisson_inversion(double mean) {
    double p = std::exp(-mean);
    double acc = p;
    double u = u01();
    long k = 0;
    const long cap = (long)(10.0 * mean) + 100;
    while (u > acc && k < cap) {
        ++k;
        p *= mean / (double)k;
        acc += p;
    }
    return k;
}

// Hormann's PTRS transformed-rejection sampler for large means.
long Stream::poisson_ptrs(double mean) {
    const double slam = std::sqrt(mean);
    const double llam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        double u = u01() - 0.5;
        double v = u01();
        double us = 0.5 - std::abs(u);
        double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return (long)kf;
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            kf * llam - mean - std::lgamma(kf + 1.0))
            return (long)kf;
    }
}

}  // namespace chafee
