#pragma once

#include <cmath>
#include <cstdio>
#include <future>
#include <stdexcept>
#include <string>
#include <vector>

#include "measures.hpp"
#include "separable.hpp"

namespace loccgap {

enum class Sign { plus, minus };

/// gamma_+ = (x - r)(y + r), gamma_- = (x + r)(y - r).
inline double gamma_pm(double x, double y, double r, Sign s) {
    return s == Sign::plus ? (x - r) * (y + r) : (x + r) * (y - r);
}

/// Witness operator (Z -/+ r I) (x) (Z +/- r I); tr[F G]/4 recovers
/// w gamma_+/- for any product element at diagonal coordinates (x, y).
inline Mat4 f_operator(double r, Sign s) {
    double sr = (s == Sign::plus) ? r : -r;
    LocalOperator za = LocalOperator::pauli_z() - LocalOperator::identity().scaled(sr);
    LocalOperator zb = LocalOperator::pauli_z() + LocalOperator::identity().scaled(sr);
    return tensor(za, zb);
}

inline double f_pm(const SeparableElement& e, double r, Sign s) {
    return 0.25 * trace_product(f_operator(r, s), e.gram()).real();
}

/// Largest alpha for which the enlarged regions stay useful at (Q, r):
/// ((2-Q) r^2 - Q) / 2.
inline double alpha_max(double q, double r) { return 0.5 * ((2.0 - q) * r * r - q); }

/// Validates the open-box constraints sqrt(Q/(2-Q)) < r < 1 and
/// 0 < alpha < alpha_max(Q, r), with margin 1e-9 at each boundary
/// (relative to alpha_max for the alpha bounds). Throws std::domain_error
/// naming the violated constraint.
inline void check_gap_feasible(double q, double r, double alpha) {
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("gap: Q must lie in (0,1)");
    double s = std::sqrt(q / (2.0 - q));
    if (!(r - s > 1e-9)) throw std::domain_error("gap: r must exceed sqrt(Q/(2-Q))");
    if (!(1.0 - r > 1e-9)) throw std::domain_error("gap: r must be below 1");
    double am = alpha_max(q, r);
    if (!(alpha > 1e-9 * am)) throw std::domain_error("gap: alpha must be positive");
    if (!(am - alpha > 1e-9 * am))
        throw std::domain_error("gap: alpha must be below ((2-Q) r^2 - Q) / 2");
}

/// Membership in the enlarged sign region: gamma_+/- >= -alpha (1 + x y).
inline bool in_enlarged_region(double x, double y, double r, double alpha, Sign s) {
    return gamma_pm(x, y, r, s) >= -alpha * (1.0 + x * y);
}

inline bool in_enlarged_union(double x, double y, double r, double alpha) {
    return in_enlarged_region(x, y, r, alpha, Sign::plus) ||
           in_enlarged_region(x, y, r, alpha, Sign::minus);
}

/// Pointwise slack of the linear bound over the cost of discrimination:
///   delta = m(1-Q) - m(C(x,y)) - mu (1 - Q - (1 - x y)/(1 + x y)).
/// Undefined on the ray 1 + x y = 0.
inline double delta(double x, double y, const EntanglementMeasure& m, double q, double mu) {
    double t = 1.0 + x * y;
    if (t <= kNullTraceThreshold)
        throw std::domain_error("delta: undefined where 1 + x y vanishes");
    double num = std::max((1.0 - x) * (1.0 + x) * (1.0 - y) * (1.0 + y), 0.0);
    double c = std::min(std::sqrt(num) / t, 1.0);
    return m.eval(1.0 - q) - m.eval(c) - mu * (1.0 - q - (1.0 - x * y) / t);
}

/// The point on the boundary of the enlarged plus-region where the kept
/// concurrence crosses 1-Q, with the slope mu* that makes the slack vanish
/// there. x* is the unique root in (x_anti, x_sym) where the bracket
/// endpoints sit at concurrence 1 and below 1-Q respectively.
struct StarPoint {
    double x_star = 0.0;
    double y_star = 0.0;
    double mu_star = 0.0;
};

inline StarPoint solve_star_point(double q, double r, double alpha) {
    check_gap_feasible(q, r, alpha);
    // y on the boundary gamma_+ = -alpha (1 + x y), solved for y.
    auto y_of = [r, alpha](double x) { return -(r * x - r * r + alpha) / (x * (1.0 + alpha) - r); };
    // (1-x)(1+x) instead of 1-x^2: keeps precision when x approaches 1.
    auto residual = [&](double x) {
        double y = y_of(x);
        double t = 1.0 + x * y;
        double num = std::max((1.0 - x) * (1.0 + x) * (1.0 - y) * (1.0 + y), 0.0);
        return std::sqrt(num) / t - (1.0 - q);
    };
    double x_lo = (r - std::sqrt(alpha * (1.0 - r * r + alpha))) / (1.0 + alpha);
    double x_hi = std::sqrt((r * r - alpha) / (1.0 + alpha));
    if (!(residual(x_lo) > 0.0 && residual(x_hi) < 0.0))
        throw std::runtime_error("solve_star_point: no sign change in bracket");
    for (int it = 0; it < 200 && x_hi - x_lo > 1e-16; ++it) {
        double mid = 0.5 * (x_lo + x_hi);
        (residual(mid) > 0.0 ? x_lo : x_hi) = mid;
    }
    StarPoint sp;
    sp.x_star = 0.5 * (x_lo + x_hi);
    sp.y_star = y_of(sp.x_star);
    double xy = sp.x_star * sp.y_star;
    sp.mu_star = (1.0 + xy) / (1.0 - xy);
    // The midpoint residual cannot beat what the final bracket resolves, so
    // accept up to the bracket's own spread with 1e-10 as the floor.
    double res = std::abs(residual(sp.x_star));
    double spread = std::abs(residual(x_lo)) + std::abs(residual(x_hi));
    if (!std::isfinite(res) || res > std::max(1e-10, 2.0 * spread))
        throw std::runtime_error("solve_star_point: root does not satisfy the defining equation");
    return sp;
}

/// Minimum of delta over the enlarged union at mu = mu*, in closed form:
/// the minimum sits at the star point, where delta = 1 - mu* (1 - Q).
inline double delta_min_analytic(double q, double r, double alpha) {
    StarPoint sp = solve_star_point(q, r, alpha);
    EQMeasure m(q);
    return delta(sp.x_star, sp.y_star, m, q, sp.mu_star);
}

/// Brute-force oracle for the same minimum: exhaustive scan of an n x n
/// uniform grid on [-1,1]^2 restricted to the enlarged union (points on
/// the singular ray are skipped). Throws if no grid point is in the region.
inline double delta_min_grid(const EntanglementMeasure& m, double q, double r, double alpha,
                             double mu, int n) {
    check_gap_feasible(q, r, alpha);
    if (n < 101) throw std::domain_error("delta_min_grid: n must be at least 101");
    double best = 0.0;
    bool found = false;
    for (int i = 0; i < n; ++i) {
        double x = -1.0 + 2.0 * i / (n - 1);
        for (int j = 0; j < n; ++j) {
            double y = -1.0 + 2.0 * j / (n - 1);
            if (1.0 + x * y <= kNullTraceThreshold) continue;
            if (!in_enlarged_union(x, y, r, alpha)) continue;
            double d = delta(x, y, m, q, mu);
            if (!found || d < best) {
                best = d;
                found = true;
            }
        }
    }
    if (!found) throw std::domain_error("delta_min_grid: region contains no grid point");
    return best;
}

struct GapParams {
    double q = 0.0;
    double r = 0.0;
    double alpha = 0.0;
    double mu = 0.0;
};

struct GapResult {
    GapParams params;
    StarPoint star;
    double delta_min = 0.0;
    double delta_low = 0.0;
};

/// Certified gap between the separable optimum and any sufficiently
/// discriminating two-way protocol:
///   delta_low = [2 alpha / (1 - r^2 + 2 alpha)] [(1-r)/(1+r)] Q delta_min.
inline GapResult delta_low(double q, double r, double alpha) {
    StarPoint sp = solve_star_point(q, r, alpha);
    EQMeasure m(q);
    double dmin = delta(sp.x_star, sp.y_star, m, q, sp.mu_star);
    double pref = (2.0 * alpha / (1.0 - r * r + 2.0 * alpha)) * ((1.0 - r) / (1.0 + r)) * q;
    return {{q, r, alpha, sp.mu_star}, sp, dmin, pref * dmin};
}

/// Maximizes delta_low over (r, alpha) at fixed Q: a 200 x 200 coarse scan
/// of the feasible box in normalized coordinates, then compass pattern
/// search until the step is below 1e-10. grid_phase shifts the coarse grid
/// (restarts with different phases land on the same optimum).
inline GapResult optimize_gap(double q, double grid_phase = 0.0) {
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("optimize_gap: Q must lie in (0,1)");
    double s = std::sqrt(q / (2.0 - q));
    double u_margin = std::max(2e-9, 2e-9 / (1.0 - s));
    auto clamp01 = [&](double v) { return std::clamp(v, u_margin, 1.0 - u_margin); };
    auto value = [&](double u, double v) {
        double r = s + clamp01(u) * (1.0 - s);
        double alpha = clamp01(v) * alpha_max(q, r);
        // Numerically degenerate corners of the box lose to any real value.
        try {
            return delta_low(q, r, alpha).delta_low;
        } catch (const std::exception&) {
            return -1.0;
        }
    };
    const int n = 200;
    double bu = 0.0, bv = 0.0, bval = -1.0;
    for (int i = 0; i < n; ++i) {
        double u = (i + 0.5 + grid_phase) / n;
        for (int j = 0; j < n; ++j) {
            double v = (j + 0.5 + grid_phase) / n;
            double f = value(u, v);
            if (f > bval) {
                bval = f;
                bu = u;
                bv = v;
            }
        }
    }
    double h = 1.0 / n;
    while (h > 1e-10) {
        bool moved = false;
        const double du[4] = {h, -h, 0.0, 0.0};
        const double dv[4] = {0.0, 0.0, h, -h};
        for (int k = 0; k < 4; ++k) {
            double u = clamp01(bu + du[k]), v = clamp01(bv + dv[k]);
            double f = value(u, v);
            if (f > bval) {
                bval = f;
                bu = u;
                bv = v;
                moved = true;
            }
        }
        if (!moved) h *= 0.5;
    }
    double r = s + clamp01(bu) * (1.0 - s);
    return delta_low(q, r, clamp01(bv) * alpha_max(q, r));
}

struct Figure2Row {
    double q = 0.0;
    double delta_low = 0.0;
    double r_opt = 0.0;
    double alpha_opt = 0.0;
};

/// Optimized gap for each Q, computed independently (and concurrently) and
/// returned in input order.
inline std::vector<Figure2Row> sweep_figure2(const std::vector<double>& q_values) {
    std::vector<std::future<GapResult>> jobs;
    jobs.reserve(q_values.size());
    for (double q : q_values)
        jobs.push_back(std::async(std::launch::async, [q] { return optimize_gap(q); }));
    std::vector<Figure2Row> rows;
    rows.reserve(q_values.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        GapResult g = jobs[i].get();
        rows.push_back({q_values[i], g.delta_low, g.params.r, g.params.alpha});
    }
    return rows;
}

/// CSV serialization at full double precision (17 significant digits).
inline std::string format_figure2_csv(const std::vector<Figure2Row>& rows) {
    std::string out = "Q,delta_low,r_opt,alpha_opt\n";
    char buf[160];
    for (const Figure2Row& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", r.q, r.delta_low, r.r_opt,
                      r.alpha_opt);
        out += buf;
    }
    return out;
}

} // namespace loccgap
