#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace chafee {

// Mixing finalizer used to derive independent engine seeds from
// (master_seed, stream_id) so results do not depend on worker layout.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// One random stream per Monte Carlo path.  All variates are produced by
// explicit inverse transforms on top of a single uniform source, so a
// record is reproducible from (master_seed, stream_id) alone.
class Stream {
public:
    Stream(std::uint64_t master_seed, std::uint64_t stream_id)
        : eng_(splitmix64(splitmix64(master_seed) ^ stream_id)) {}

    // Uniform on (0,1); the top-53-bit map can return 0, which is redrawn
    // so downstream inverse CDFs never see an endpoint.
    double u01() {
        for (;;) {
            double u = (double)(eng_() >> 11) * 0x1.0p-53;
            if (u > 0.0) return u;
        }
    }

    double exponential(double rate) { return -std::log(u01()) / rate; }

    // P(R > r) = (r/lo)^-alpha for r >= lo.
    double pareto(double alpha, double lo) {
        return lo * std::pow(u01(), -1.0 / alpha);
    }

    // Pareto density restricted to (lo, hi], by CDF inversion.
    double pareto_truncated(double alpha, double lo, double hi) {
        double a = std::pow(lo, -alpha);
        double b = std::pow(hi, -alpha);
        return std::pow(a - u01() * (a - b), -1.0 / alpha);
    }

    // Index into a cumulative weight table (small tables, linear scan).
    int pick(const double* cum, int n) {
        double u = u01() * cum[n - 1];
        for (int i = 0; i < n - 1; ++i)
            if (u <= cum[i]) return i;
        return n - 1;
    }

    long poisson(double mean) {
        if (mean <= 0.0) return 0;
        return mean < 10.0 ? poisson_inversion(mean) : poisson_ptrs(mean);
    }

    std::uint64_t raw() { return eng_(); }

private:
    long poisson_inversion(double mean);
    long poisson_ptrs(double mean);

    std::mt19937_64 eng_;
};

}  // namespace chafee
