#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace chafee {

// Coefficients a_k of u(z) = sum_k a_k * sqrt(2) sin(k pi z), k = 1..N.
// The natural norm throughout is the H^1_0 seminorm |grad u|_{L^2},
// which the basis diagonalizes: ||u||^2 = sum_k (k pi a_k)^2.
struct SpectralField {
    std::vector<double> coeffs;

    SpectralField() = default;
    explicit SpectralField(std::size_t n_modes) : coeffs(n_modes, 0.0) {}

    std::size_t modes() const { return coeffs.size(); }
    double& operator[](std::size_t k) { return coeffs[k]; }
    double operator[](std::size_t k) const { return coeffs[k]; }

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(double s);

    double h_norm() const;
    double l2_norm() const;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

// Mean value int_0^1 u dz; odd modes contribute 2*sqrt(2)/(k pi).
double mean_value(const SpectralField& u);

// Dense sine transform pair on the interior collocation grid
// z_j = (j+1)/(M+1), j = 0..M-1.  Column k of the evaluation matrix is
// sqrt(2) sin((k+1) pi z_j); columns are orthogonal with
// sum_j E_jk E_jl = (M+1) delta_kl, so projection is E^T u / (M+1).
// With M >= 3N the projection of a cubic of an N-mode field is exact;
// the default M = 4N keeps headroom.
class SineBasis {
public:
    SineBasis(int n_modes, int m_grid);

    int n_modes() const { return n_; }
    int grid_points() const { return m_; }
    const std::vector<double>& nodes() const { return nodes_; }

    // values[j] = u(z_j)
    void eval(const SpectralField& u, std::vector<double>& values) const;
    std::vector<double> eval(const SpectralField& u) const;

    void project(const std::vector<double>& values, SpectralField& out) const;
    SpectralField project(const std::vector<double>& values) const;

    // Grid sup norms; the grid resolves N-mode fields well enough that the
    // collocation sup is the working surrogate for |u|_inf.
    double sup_norm(const SpectralField& u) const;
    double sup_dist(const SpectralField& a, const SpectralField& b) const;

    // Evaluation at an arbitrary point, for tests and output.
    static double eval_at(const SpectralField& u, double z);

    // Grid samples of basis mode k (0-based), length grid_points().
    const double* column(int k) const { return eval_.data() + (std::size_t)k * m_; }

private:
    int n_, m_;
    std::vector<double> nodes_;
    std::vector<double> eval_;  // column-major, m_ rows per mode
    mutable std::vector<double> scratch_;
};

}  // namespace chafee
