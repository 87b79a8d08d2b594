#include "chafee/domains.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace chafee {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double raw_sup(const std::vector<double>& grid) {
    double m = 0.0;
    for (double v : grid) m = std::max(m, std::abs(v));
    return m;
}

std::string fmt_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc())
        throw std::runtime_error("bad numeric field '" + s + "'");
    return v;
}
}  // namespace

DomainGeometry::DomainGeometry(const Dynamics& dyn, const SpectralField& phi_plus,
                               ClassifyOptions copt, ProbeOptions popt)
    : dyn_(dyn), copt_(copt), popt_(popt), phi_plus_(phi_plus) {
    phi_minus_ = -1.0 * phi_plus_;
    const SineBasis& basis = dyn_.basis();
    phig_plus_ = basis.eval(phi_plus_);
    phig_minus_ = basis.eval(phi_minus_);
    g_.resize(basis.grid_points());

    const int n = dyn_.params().n_modes;
    const int pairs = std::max(1, popt_.count / 2);
    for (int k = 0; k < pairs && k < n; ++k) {
        // sup-normalize so that a probe offset of delta moves the sup norm by delta
        SpectralField p(n);
        p[k] = 1.0;
        double s = basis.sup_norm(p);
        p[k] = 1.0 / s;
        probes_.push_back(p);
        SpectralField m = -1.0 * p;
        probes_.push_back(m);
    }
    for (const auto& p : probes_) probe_grids_.push_back(basis.eval(p));

    // Certified sup-ball: bisect the plain classifier along every probe ray
    // and keep a safety fraction of the smallest exit offset.  Mirror
    // symmetry of the dynamics makes both basins share the radius.
    double worst = kInf;
    for (std::size_t j = 0; j < probes_.size(); ++j) {
        double lo = 0.0, hi = 0.25;
        const double cap = 8.0;
        while (hi < cap) {
            SpectralField y = phi_plus_;
            SpectralField step = probes_[j];
            step *= hi;
            y += step;
            if (classify_plain(y) != Basin::Plus) break;
            lo = hi;
            hi *= 2.0;
        }
        if (hi >= cap) continue;  // ray never escapes within the cap
        while (hi - lo > 1e-3 * hi) {
            double mid = 0.5 * (lo + hi);
            SpectralField y = phi_plus_;
            SpectralField step = probes_[j];
            step *= mid;
            y += step;
            if (classify_plain(y) == Basin::Plus)
                lo = mid;
            else
                hi = mid;
        }
        worst = std::min(worst, 0.5 * (lo + hi));
    }
    if (!std::isfinite(worst))
        throw std::runtime_error("no probe ray escapes the basin; cannot certify a safe ball");
    safe_plus_ = safe_minus_ = popt_.safety * worst;
}

double DomainGeometry::grid_dist(const std::vector<double>& grid, int sign) const {
    const std::vector<double>& ref = sign > 0 ? phig_plus_ : phig_minus_;
    double m = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j)
        m = std::max(m, std::abs(grid[j] - ref[j]));
    return m;
}

Basin DomainGeometry::classify_plain(const SpectralField& x) const {
    const double dtc = dyn_.params().dt;
    SpectralField y = x;
    double t = 0.0;
    dyn_.basis().eval(y, g_);
    for (;;) {
        if (grid_dist(g_, +1) <= copt_.tol) return Basin::Plus;
        if (grid_dist(g_, -1) <= copt_.tol) return Basin::Minus;
        if (t > copt_.t_max) return Basin::Unresolved;
        try {
            dyn_.step_stabilized(y, dtc, raw_sup(g_));
        } catch (const IntegrationError&) {
            return Basin::Unresolved;
        }
        t += dtc;
        dyn_.basis().eval(y, g_);
    }
}

Basin DomainGeometry::classify(const SpectralField& x) const {
    const double dtc = copt_.dt_factor * dyn_.params().dt;
    SpectralField y = x;
    double t = 0.0;
    dyn_.basis().eval(y, g_);
    for (;;) {
        if (grid_dist(g_, +1) <= safe_plus_) return Basin::Plus;
        if (grid_dist(g_, -1) <= safe_minus_) return Basin::Minus;
        if (t > copt_.t_max) return Basin::Unresolved;
        try {
            dyn_.step_stabilized(y, dtc, raw_sup(g_));
        } catch (const IntegrationError&) {
            return Basin::Unresolved;
        }
        t += dtc;
        dyn_.basis().eval(y, g_);
    }
}

bool DomainGeometry::in_domain(const SpectralField& x, int sign) const {
    return classify(x) == (sign > 0 ? Basin::Plus : Basin::Minus);
}

bool DomainGeometry::in_reduced(const SpectralField& x, int sign,
                                const std::vector<double>& deltas) const {
    if (deltas.empty()) return in_domain(x, sign);
    const double d1 = deltas[0];
    double drest = 0.0;
    for (std::size_t i = 1; i < deltas.size(); ++i) drest += deltas[i];
    const double dtot = d1 + drest;
    const double R = safe_radius(sign);
    const Basin want = sign > 0 ? Basin::Plus : Basin::Minus;

    const double dtc = copt_.dt_factor * dyn_.params().dt;
    const int stride = std::max(1, (int)std::lround(popt_.stride_factor / copt_.dt_factor));

    SpectralField y = x;
    std::vector<double> yg = dyn_.basis().eval(y);
    std::vector<double> pg(yg.size());
    double t = 0.0;
    for (;;) {
        double d = grid_dist(yg, sign);
        if (d <= R - dtot) return true;  // every remaining perturbation is certified
        if (grid_dist(yg, -sign) <= safe_radius(-sign)) return false;

        for (std::size_t j = 0; j < probes_.size(); ++j) {
            for (std::size_t m = 0; m < yg.size(); ++m)
                pg[m] = yg[m] + d1 * probe_grids_[j][m];
            if (grid_dist(pg, sign) <= R - drest) continue;
            SpectralField yj = y;
            SpectralField off = probes_[j];
            off *= d1;
            yj += off;
            if (classify(yj) != want) return false;
            if (drest > 0.0) {
                for (std::size_t j2 = 0; j2 < probes_.size(); ++j2) {
                    double worst = 0.0;
                    const std::vector<double>& q = probe_grids_[j2];
                    const std::vector<double>& ref = sign > 0 ? phig_plus_ : phig_minus_;
                    for (std::size_t m = 0; m < yg.size(); ++m)
                        worst = std::max(worst, std::abs(pg[m] + drest * q[m] - ref[m]));
                    if (worst <= R) continue;
                    SpectralField z = yj;
                    SpectralField off2 = probes_[j2];
                    off2 *= drest;
                    z += off2;
                    if (classify(z) != want) return false;
                }
            }
        }

        if (t > copt_.t_max) return false;
        try {
            double sup = raw_sup(yg);
            for (int s = 0; s < stride; ++s) {
                dyn_.step_stabilized(y, dtc, sup);
                // lagged but conservative while large amplitudes decay
                sup = raw_sup(dyn_.last_eval());
            }
        } catch (const IntegrationError&) {
            return false;
        }
        t += stride * dtc;
        dyn_.basis().eval(y, yg);
    }
}

double DomainGeometry::threshold_radius(int sign, const SpectralField& v,
                                        const std::vector<double>& deltas,
                                        double rel_tol, double s_cap) const {
    auto inside = [&](double s) {
        SpectralField y = phi(sign);
        SpectralField off = v;
        off *= s;
        y += off;
        return in_reduced(y, sign, deltas);
    };
    if (inside(s_cap)) return kInf;
    double lo = 0.0, hi = 0.5;
    while (hi < s_cap && inside(hi)) {
        lo = hi;
        hi *= 2.0;
    }
    hi = std::min(hi, s_cap);
    while (hi - lo > rel_tol * std::max(hi, 1e-6)) {
        double mid = 0.5 * (lo + hi);
        if (inside(mid))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double ThresholdTable::find(int sign, int dir, const std::vector<double>& deltas) const {
    for (const auto& r : rows)
        if (r.sign == sign && r.dir == dir && r.deltas == deltas) return r.radius;
    throw std::out_of_range("threshold table has no matching row");
}

bool ThresholdTable::has(int sign, int dir, const std::vector<double>& deltas) const {
    for (const auto& r : rows)
        if (r.sign == sign && r.dir == dir && r.deltas == deltas) return true;
    return false;
}

ThresholdTable build_threshold_table(const DomainGeometry& geom, const NoiseSpec& spec,
                                     const std::vector<std::vector<double>>& delta_sets,
                                     bool mirror_symmetry, int workers) {
    const double lambda = geom.dynamics().params().lambda;
    const int ndir = (int)spec.dirs.size();

    auto mirror_of = [&](int i) {
        for (int j = 0; j < ndir; ++j) {
            SpectralField s = spec.dirs[i].v + spec.dirs[j].v;
            if (s.h_norm() < 1e-9) return j;
        }
        return -1;
    };

    // Plus-sign bisections carry all the cost; run them as a task list.
    struct Task {
        std::size_t ds;
        int dir;
        int sign;
        double radius = 0.0;
    };
    std::vector<Task> tasks;
    for (std::size_t d = 0; d < delta_sets.size(); ++d) {
        for (int i = 0; i < ndir; ++i) tasks.push_back({d, i, +1});
        if (!mirror_symmetry)
            for (int i = 0; i < ndir; ++i) tasks.push_back({d, i, -1});
    }
    const int nthreads = std::max(1, std::min<int>(workers, (int)tasks.size()));
    if (nthreads == 1) {
        for (auto& t : tasks)
            t.radius = geom.threshold_radius(t.sign, spec.dirs[t.dir].v, delta_sets[t.ds]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < nthreads; ++w)
            pool.emplace_back([&, copy = geom]() mutable {
                for (std::size_t i = next.fetch_add(1); i < tasks.size();
                     i = next.fetch_add(1)) {
                    Task& t = tasks[i];
                    t.radius =
                        copy.threshold_radius(t.sign, spec.dirs[t.dir].v, delta_sets[t.ds]);
                }
            });
        for (auto& th : pool) th.join();
    }

    ThresholdTable table;
    for (std::size_t d = 0; d < delta_sets.size(); ++d) {
        for (int sign : {+1, -1}) {
            for (int i = 0; i < ndir; ++i) {
                ThresholdTable::Row row;
                row.lambda = lambda;
                row.sign = sign;
                row.dir = i;
                row.deltas = delta_sets[d];
                if (sign == -1 && mirror_symmetry) {
                    const int m = mirror_of(i);
                    if (m < 0)
                        throw std::runtime_error(
                            "mirror_symmetry requires +/- paired directions");
                    row.radius = table.find(+1, m, delta_sets[d]);
                } else {
                    for (const auto& t : tasks)
                        if (t.ds == d && t.dir == i && t.sign == sign) row.radius = t.radius;
                }
                table.rows.push_back(row);
            }
        }
    }
    return table;
}

double characteristic_rate(const NoiseSpec& spec, double eps,
                           const ThresholdTable& table, int sign) {
    double s = 0.0;
    for (std::size_t i = 0; i < spec.dirs.size(); ++i) {
        double r = table.find(sign, (int)i, {});
        if (std::isinf(r)) continue;
        s += spec.dirs[i].weight * std::pow(r, -spec.alpha);
    }
    return std::pow(eps, spec.alpha) * s;
}

TransitionReport check_transitions(const NoiseSpec& spec, const ThresholdTable& table,
                                   const std::vector<double>& eps_grid,
                                   const ScalingParams& scal, int sign) {
    TransitionReport rep;
    for (std::size_t i = 0; i < spec.dirs.size(); ++i)
        if (!std::isinf(table.find(sign, (int)i, {}))) rep.nontrivial = true;

    for (double eps : eps_grid) {
        const double d1 = std::pow(eps, scal.gamma);
        const double d2 = std::pow(eps, 2.0 * scal.gamma);
        double mass = 0.0;
        for (std::size_t i = 0; i < spec.dirs.size(); ++i) {
            double r_full = table.find(sign, (int)i, {});
            double r_red = table.find(sign, (int)i, {d1, d2});
            double a = std::isinf(r_red) ? 0.0 : std::pow(r_red, -spec.alpha);
            double b = std::isinf(r_full) ? 0.0 : std::pow(r_full, -spec.alpha);
            mass += spec.dirs[i].weight * (a - b);
        }
        rep.eps.push_back(eps);
        rep.shell_mass.push_back(mass);
    }
    for (std::size_t j = 1; j < rep.shell_mass.size(); ++j)
        if (rep.shell_mass[j] > rep.shell_mass[j - 1]) rep.shrinking = false;
    return rep;
}

void save_table(const std::string& path, const ThresholdTable& table,
                const std::string& config_hash) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    if (!config_hash.empty()) out << "# config_hash=" << config_hash << "\n";
    out << "lambda,sign,direction_index,delta,radius\n";
    for (const auto& r : table.rows) {
        out << fmt_double(r.lambda) << ',' << r.sign << ',' << r.dir << ',';
        if (r.deltas.empty()) {
            out << '0';
        } else {
            for (std::size_t i = 0; i < r.deltas.size(); ++i) {
                if (i) out << '+';
                out << fmt_double(r.deltas[i]);
            }
        }
        out << ',' << fmt_double(r.radius) << '\n';
    }
}

ThresholdTable load_table(const std::string& path, std::string* config_hash) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string line;
    if (config_hash) config_hash->clear();
    while (std::getline(in, line) && !line.empty() && line[0] == '#') {
        const std::string tag = "# config_hash=";
        if (config_hash && line.rfind(tag, 0) == 0) *config_hash = line.substr(tag.size());
    }
    if (line != "lambda,sign,direction_index,delta,radius")
        throw std::runtime_error("unrecognized table header in '" + path + "'");
    ThresholdTable table;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f;
        ThresholdTable::Row row;
        std::getline(ss, f, ',');
        row.lambda = parse_double(f);
        std::getline(ss, f, ',');
        row.sign = std::stoi(f);
        std::getline(ss, f, ',');
        row.dir = std::stoi(f);
        std::getline(ss, f, ',');
        if (f != "0") {
            std::stringstream ds(f);
            std::string piece;
            while (std::getline(ds, piece, '+')) row.deltas.push_back(parse_double(piece));
        }
        std::getline(ss, f, ',');
        row.radius = parse_double(f);
        table.rows.push_back(row);
    }
    return table;
}

}  // namespace chafee
