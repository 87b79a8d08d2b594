#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "chafee/stats.hpp"

using namespace chafee;

namespace {

ExitRecord rec(double eps, double tau, double rate, ExitCause cause,
               std::uint64_t id = 0, long jumps = 1) {
    ExitRecord r;
    r.seed_id = id;
    r.epsilon = eps;
    r.tau = tau;
    r.normalized_tau = rate * tau;
    r.n_large_jumps = jumps;
    r.cause = cause;
    return r;
}

}  // namespace

TEST_CASE("laplace estimate closed cases") {
    // theta = 0 averages exp(0): exactly one regardless of the sample
    std::vector<double> s = {0.3, 1.7, 2.9};
    auto e0 = laplace_estimate(s, 0.0);
    CHECK(e0.value == 1.0);
    CHECK(e0.se == 0.0);
    CHECK(e0.n == 3);

    // two equal samples at 1, theta = 1: mean is exp(-1), spread is zero
    auto e1 = laplace_estimate({1.0, 1.0}, 1.0);
    CHECK(e1.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(e1.se == doctest::Approx(0.0).epsilon(1e-15));

    // n = 2 jackknife equals the exact sd of the mean: |x1 - x2| / 2
    auto e2 = laplace_estimate({1.0, 2.0}, 1.0);
    double d = std::exp(-1.0) - std::exp(-2.0);
    CHECK(e2.value == doctest::Approx(0.5 * (std::exp(-1.0) + std::exp(-2.0))));
    CHECK(e2.se == doctest::Approx(0.5 * d).epsilon(1e-12));
}

TEST_CASE("laplace estimate rejects bad input") {
    CHECK_THROWS(laplace_estimate({}, 1.0));
    CHECK_THROWS(laplace_estimate({1.0}, -1.0));
    CHECK_THROWS(laplace_estimate({1.0}, -2.0));
}

TEST_CASE("laplace estimate is non-increasing in theta") {
    std::mt19937_64 eng(7);
    std::exponential_distribution<double> exp1(1.0);
    std::vector<double> s(500);
    for (auto& v : s) v = exp1(eng);
    double prev = HUGE_VAL;
    for (double theta : {-0.5, 0.0, 0.25, 0.5, 1.0, 2.0, 4.0}) {
        double v = laplace_estimate(s, theta).value;
        CHECK(v <= prev + 1e-15);
        prev = v;
    }
}

TEST_CASE("ks distance fixed conventions") {
    // single sample at the exponential median: both one-sided gaps are 1/2
    CHECK(ks_exponential({std::log(2.0)}) == doctest::Approx(0.5).epsilon(1e-12));

    // all mass at zero sits as far as possible from the continuous law
    CHECK(ks_exponential({0.0, 0.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-15));

    // exact mid-quantiles leave only the half-step gap
    const int n = 1000;
    std::vector<double> q(n);
    for (int i = 0; i < n; ++i) q[i] = -std::log(1.0 - (i + 0.5) / n);
    CHECK(ks_exponential(q) <= 0.5 / n + 1e-12);

    CHECK_THROWS(ks_exponential({}));
}

TEST_CASE("ks statistic stays under the 99% critical value on true samples") {
    // D * sqrt(n) for genuine Exp(1) samples should clear 1.63 in at
    // least 99% of replications (fixed generator, deterministic count)
    std::mt19937_64 eng(20260823);
    std::exponential_distribution<double> exp1(1.0);
    const int reps = 1000, n = 100;
    int ok = 0;
    std::vector<double> s(n);
    for (int r = 0; r < reps; ++r) {
        for (auto& v : s) v = exp1(eng);
        if (ks_exponential(s) * std::sqrt((double)n) < 1.63) ++ok;
    }
    CHECK(ok >= 990);
}

TEST_CASE("linear fit recovers exact lines and rejects degenerate input") {
    LinearFit f = linear_fit({1.0, 2.0, 3.0, 4.0}, {3.0, 5.0, 7.0, 9.0});
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-14));

    // constant y: zero slope, perfect fit by convention
    LinearFit c = linear_fit({1.0, 2.0, 3.0}, {4.0, 4.0, 4.0});
    CHECK(c.slope == doctest::Approx(0.0));
    CHECK(c.r2 == doctest::Approx(1.0));

    CHECK_THROWS(linear_fit({1.0}, {2.0}));
    CHECK_THROWS(linear_fit({1.0, 2.0}, {2.0}));
    CHECK_THROWS(linear_fit({3.0, 3.0}, {1.0, 2.0}));
}

TEST_CASE("power law fit recovers the exponent independent of scale") {
    std::vector<std::pair<double, double>> pts;
    for (double eps : {0.0625, 0.03125, 0.015625})
        pts.push_back({eps, std::pow(eps, -1.5)});
    LinearFit f = fit_power_law(pts);
    CHECK(f.slope == doctest::Approx(-1.5).epsilon(1e-12));
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));

    // a prefactor moves the intercept only
    std::vector<std::pair<double, double>> scaled;
    for (auto& p : pts) scaled.push_back({p.first, 7.3 * p.second});
    LinearFit g = fit_power_law(scaled);
    CHECK(g.slope == doctest::Approx(f.slope).epsilon(1e-12));

    CHECK_THROWS(fit_power_law({{0.5, 1.0}, {0.25, 2.0}}));
    CHECK_THROWS(fit_power_law({{0.5, 1.0}, {0.25, 2.0}, {0.125, -1.0}}));
}

TEST_CASE("summaries group by intensity and recover the rate") {
    const double rate4 = 0.003, rate5 = 0.008;
    std::vector<ExitRecord> rs;
    rs.push_back(rec(0.0625, 100.0, rate4, ExitCause::LargeJump, 0, 2));
    rs.push_back(rec(0.0625, 300.0, rate4, ExitCause::LargeJump, 1, 4));
    rs.push_back(rec(0.0625, 500.0, rate4, ExitCause::Censored, 2, 9));
    rs.push_back(rec(0.03125, 50.0, rate5, ExitCause::DriftOrSmallNoise, 3, 0));

    EnsembleSummary sum = summarize_records(rs, {0.5, 1.0});
    REQUIRE(sum.slices.size() == 2);
    // slices ordered by decreasing intensity
    CHECK(sum.slices[0].epsilon == 0.0625);
    CHECK(sum.slices[1].epsilon == 0.03125);

    const SliceSummary& s4 = sum.slices[0];
    CHECK(s4.n_total == 3);
    CHECK(s4.n == 2);
    CHECK(s4.censor_fraction == doctest::Approx(1.0 / 3.0));
    CHECK(s4.mean_tau == doctest::Approx(200.0));
    // se of {100, 300}: sd = sqrt(2) * 100, se = 100
    CHECK(s4.se_tau == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(s4.rate == doctest::Approx(rate4).epsilon(1e-15));
    CHECK(s4.mean_normalized == doctest::Approx(rate4 * 200.0).epsilon(1e-12));
    // jump counts average over every record, censored included
    CHECK(s4.mean_jumps == doctest::Approx(5.0));
    REQUIRE(s4.laplace.size() == 2);
    CHECK(s4.laplace[0].theta == 0.5);
    CHECK(s4.laplace[0].value ==
          doctest::Approx(0.5 * (std::exp(-0.5 * rate4 * 100.0) +
                                 std::exp(-0.5 * rate4 * 300.0))));

    // two slices are not enough for a scaling fit
    CHECK_FALSE(sum.scaling_valid);
}

TEST_CASE("summaries keep empty and all-censored slices visible") {
    std::vector<ExitRecord> rs;
    rs.push_back(rec(0.0625, 42.0, 0.003, ExitCause::Censored));

    EnsembleSummary sum =
        summarize_records(rs, {1.0}, {0.0625, 0.03125});
    REQUIRE(sum.slices.size() == 2);

    // all censored: counts and rate survive, moments are NaN
    CHECK(sum.slices[0].n_total == 1);
    CHECK(sum.slices[0].n == 0);
    CHECK(sum.slices[0].censor_fraction == 1.0);
    CHECK(sum.slices[0].rate == doctest::Approx(0.003));
    CHECK(std::isnan(sum.slices[0].mean_tau));
    CHECK(std::isnan(sum.slices[0].laplace[0].value));

    // intensity with no records at all
    CHECK(sum.slices[1].n_total == 0);
    CHECK(std::isnan(sum.slices[1].mean_tau));

    std::string text = summary_text(sum);
    CHECK(text.find("[epsilon = 0.0625]") != std::string::npos);
    CHECK(text.find("[epsilon = 0.03125]") != std::string::npos);
    std::string csv = summary_table(sum);
    CHECK(csv.find("epsilon,n,censor_fraction,mean_tau") == 0);
}

TEST_CASE("empty record set yields an empty but valid summary") {
    EnsembleSummary sum = summarize_records({}, {1.0});
    CHECK(sum.slices.empty());
    CHECK_FALSE(sum.scaling_valid);
    CHECK(summary_table(sum).find("epsilon,") == 0);
}

TEST_CASE("scaling fit appears with three usable slices") {
    std::vector<ExitRecord> rs;
    std::uint64_t id = 0;
    for (double eps : {0.0625, 0.03125, 0.015625}) {
        double tau = std::pow(eps, -1.5);
        for (int i = 0; i < 3; ++i)
            rs.push_back(rec(eps, tau, 1.0 / tau, ExitCause::LargeJump, id++));
    }
    EnsembleSummary sum = summarize_records(rs, {1.0});
    REQUIRE(sum.scaling_valid);
    CHECK(sum.scaling.slope == doctest::Approx(-1.5).epsilon(1e-10));
    std::string text = summary_text(sum);
    CHECK(text.find("[scaling]") != std::string::npos);
}

TEST_CASE("normalized statistics are invariant under tau/rate rescaling") {
    // scaling tau by c and the rate by 1/c leaves normalized_tau bits
    // unchanged, so every normalized statistic must match exactly
    const double c = 64.0;  // power of two: the products are exact
    std::vector<ExitRecord> a, b;
    std::mt19937_64 eng(11);
    std::exponential_distribution<double> exp1(1.0);
    for (int i = 0; i < 200; ++i) {
        double nt = exp1(eng);
        a.push_back(rec(0.0625, nt / 0.003, 0.003, ExitCause::LargeJump, i));
        b.push_back(rec(0.0625, c * nt / 0.003, 0.003 / c, ExitCause::LargeJump, i));
    }
    EnsembleSummary sa = summarize_records(a, {0.5, 1.0, 2.0});
    EnsembleSummary sb = summarize_records(b, {0.5, 1.0, 2.0});
    CHECK(sa.slices[0].ks == sb.slices[0].ks);
    CHECK(sa.slices[0].mean_normalized == sb.slices[0].mean_normalized);
    for (std::size_t t = 0; t < 3; ++t) {
        CHECK(sa.slices[0].laplace[t].value == sb.slices[0].laplace[t].value);
        CHECK(sa.slices[0].laplace[t].se == sb.slices[0].laplace[t].se);
    }
}
