#include "chafee/spectral.hpp"

#include <algorithm>
#include <cassert>
#include <numbers>

namespace chafee {

namespace {
constexpr double kPi = std::numbers::pi;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
    assert(coeffs.size() == o.coeffs.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += o.coeffs[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
    assert(coeffs.size() == o.coeffs.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] -= o.coeffs[i];
    return *this;
}

SpectralField& SpectralField::operator*=(double s) {
    for (double& c : coeffs) c *= s;
    return *this;
}

double SpectralField::h_norm() const {
    double s = 0.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        double w = (double)(i + 1) * kPi * coeffs[i];
        s += w * w;
    }
    return std::sqrt(s);
}

double SpectralField::l2_norm() const {
    double s = 0.0;
    for (double c : coeffs) s += c * c;
    return std::sqrt(s);
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

double mean_value(const SpectralField& u) {
    // int_0^1 sqrt(2) sin(k pi z) dz = sqrt(2) (1 - cos k pi) / (k pi)
    double s = 0.0;
    for (std::size_t i = 0; i < u.coeffs.size(); i += 2) {
        double k = (double)(i + 1);
        s += u.coeffs[i] * 2.0 * std::numbers::sqrt2 / (k * kPi);
    }
    return s;
}

SineBasis::SineBasis(int n_modes, int m_grid) : n_(n_modes), m_(m_grid) {
    assert(n_ > 0 && m_ >= n_);
    nodes_.resize(m_);
    eval_.resize((std::size_t)n_ * m_);
    for (int j = 0; j < m_; ++j) nodes_[j] = (double)(j + 1) / (double)(m_ + 1);
    for (int k = 0; k < n_; ++k) {
        double* col = eval_.data() + (std::size_t)k * m_;
        for (int j = 0; j < m_; ++j)
            col[j] = std::numbers::sqrt2 * std::sin((double)(k + 1) * kPi * nodes_[j]);
    }
    scratch_.resize(m_);
}

void SineBasis::eval(const SpectralField& u, std::vector<double>& values) const {
    assert((int)u.modes() == n_);
    values.assign(m_, 0.0);
    double* __restrict v = values.data();
    for (int k = 0; k < n_; ++k) {
        const double a = u.coeffs[k];
        const double* __restrict col = eval_.data() + (std::size_t)k * m_;
#pragma omp simd
        for (int j = 0; j < m_; ++j) v[j] += a * col[j];
    }
}

std::vector<double> SineBasis::eval(const SpectralField& u) const {
    std::vector<double> v;
    eval(u, v);
    return v;
}

void SineBasis::project(const std::vector<double>& values, SpectralField& out) const {
    assert((int)values.size() == m_);
    out.coeffs.resize(n_);
    const double scale = 1.0 / (double)(m_ + 1);
    const double* __restrict v = values.data();
    for (int k = 0; k < n_; ++k) {
        const double* __restrict col = eval_.data() + (std::size_t)k * m_;
        double s = 0.0;
        // simd reduction: lane count fixed by the target, result is
        // reproducible run to run for a given build
#pragma omp simd reduction(+ : s)
        for (int j = 0; j < m_; ++j) s += col[j] * v[j];
        out.coeffs[k] = s * scale;
    }
}

SpectralField SineBasis::project(const std::vector<double>& values) const {
    SpectralField f;
    project(values, f);
    return f;
}

double SineBasis::sup_norm(const SpectralField& u) const {
    eval(u, scratch_);
    double m = 0.0;
    for (double v : scratch_) m = std::max(m, std::abs(v));
    return m;
}

double SineBasis::sup_dist(const SpectralField& a, const SpectralField& b) const {
    assert(a.modes() == b.modes());
    double m = 0.0;
    double* __restrict v = scratch_.data();
    std::fill(scratch_.begin(), scratch_.end(), 0.0);
    for (int k = 0; k < n_; ++k) {
        const double d = a.coeffs[k] - b.coeffs[k];
        if (d == 0.0) continue;
        const double* __restrict col = eval_.data() + (std::size_t)k * m_;
        for (int j = 0; j < m_; ++j) v[j] += d * col[j];
    }
    for (int j = 0; j < m_; ++j) m = std::max(m, std::abs(v[j]));
    return m;
}

double SineBasis::eval_at(const SpectralField& u, double z) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.coeffs.size(); ++i)
        s += u.coeffs[i] * std::numbers::sqrt2 * std::sin((double)(i + 1) * kPi * z);
    return s;
}

}  // namespace chafee
