#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace varbounds {

/// Settings for the bracketed root finder.
///
/// The effective x-resolution at a candidate root b is
/// 2*eps*|b| + tolerance/2 (the bracket cannot shrink below machine
/// spacing), so the default tolerance asks for full double precision.
struct RootConfig {
    double tolerance = 2.2204e-16;
    int max_iterations = 1000;
    /// When set, replaces the function value at an interval end point. Used
    /// where the objective has a structural zero at an end point that would
    /// otherwise stop the search immediately.
    std::optional<double> f_lower_override;
    std::optional<double> f_upper_override;
};

struct NoBracketError : std::runtime_error {
    double f_lo;
    double f_hi;
    NoBracketError(double flo, double fhi)
        : std::runtime_error("find_root: no sign change over the interval (f(lo)=" +
                             std::to_string(flo) + ", f(hi)=" + std::to_string(fhi) + ")"),
          f_lo(flo),
          f_hi(fhi) {}
};

struct NonConvergenceError : std::runtime_error {
    double bracket_lo;
    double bracket_hi;
    NonConvergenceError(double lo, double hi)
        : std::runtime_error("find_root: iteration budget exhausted; best bracket [" +
                             std::to_string(lo) + ", " + std::to_string(hi) + "]"),
          bracket_lo(lo),
          bracket_hi(hi) {}
};

/// Brent-style bracketed root finding (bisection/secant/inverse-quadratic
/// with guaranteed bracket maintenance). Requires opposite signs at the
/// (possibly overridden) end points; deterministic for fixed inputs.
template <typename F>
double find_root(F&& f, double lo, double hi, const RootConfig& cfg = {}) {
    if (!(lo < hi)) throw std::invalid_argument("find_root: need lo < hi");
    if (!(cfg.tolerance > 0.0)) throw std::invalid_argument("find_root: tolerance must be > 0");
    if (cfg.max_iterations < 1) throw std::invalid_argument("find_root: max_iterations must be >= 1");

    constexpr double eps = std::numeric_limits<double>::epsilon();
    double a = lo, b = hi;
    double fa = cfg.f_lower_override ? *cfg.f_lower_override : f(a);
    double fb = cfg.f_upper_override ? *cfg.f_upper_override : f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (!((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0))) throw NoBracketError(fa, fb);

    double c = a, fc = fa; // c: previous iterate with f(c)*f(b) < 0
    for (int iter = 0; iter <= cfg.max_iterations; ++iter) {
        const double prev_step = b - a;
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol_act = 2.0 * eps * std::fabs(b) + cfg.tolerance / 2.0;
        double new_step = (c - b) / 2.0;
        if (std::fabs(new_step) <= tol_act || fb == 0.0) return b;

        // Try interpolation when the previous step was large enough and f
        // decreased in magnitude; fall back to bisection otherwise.
        if (std::fabs(prev_step) >= tol_act && std::fabs(fa) > std::fabs(fb)) {
            const double cb = c - b;
            double p, q;
            if (a == c) { // only two distinct points: secant
                const double t1 = fb / fa;
                p = cb * t1;
                q = 1.0 - t1;
            } else { // inverse quadratic interpolation
                const double r = fa / fc;
                const double t1 = fb / fc;
                const double t2 = fb / fa;
                p = t2 * (cb * r * (r - t1) - (b - a) * (t1 - 1.0));
                q = (r - 1.0) * (t1 - 1.0) * (t2 - 1.0);
            }
            if (p > 0.0) {
                q = -q;
            } else {
                p = -p;
            }
            if (p < (0.75 * cb * q - std::fabs(tol_act * q) / 2.0) &&
                p < std::fabs(prev_step * q / 2.0)) {
                new_step = p / q;
            }
        }

        if (std::fabs(new_step) < tol_act) new_step = (new_step > 0.0) ? tol_act : -tol_act;
        a = b;
        fa = fb;
        b += new_step;
        fb = f(b);
        if ((fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0)) {
            c = a;
            fc = fa;
        }
    }
    throw NonConvergenceError(std::fmin(b, c), std::fmax(b, c));
}

/// Settings for adaptive quadrature.
struct QuadConfig {
    double rel_tolerance = 1e-10;
    int max_subdivisions = 1000;
};

struct AccuracyError : std::runtime_error {
    double estimate;
    double error_bound;
    AccuracyError(double est, double err)
        : std::runtime_error("integrate: subdivision budget exhausted (estimate=" +
                             std::to_string(est) + ", error bound=" + std::to_string(err) + ")"),
          estimate(est),
          error_bound(err) {}
};

namespace detail {

struct QuadInterval {
    double a, b;
    double integral;
    double err;
    bool operator<(const QuadInterval& o) const { return err < o.err; }
};

// 15-point Gauss-Kronrod rule with embedded 7-point Gauss estimate. End
// points are never evaluated, so integrable end-point singularities are
// handled by subdivision.
template <typename F>
QuadInterval gk15(F& f, double a, double b) {
    static constexpr double xgk[8] = {
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
    static constexpr double wgk[8] = {
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr double wg[4] = {
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double resk = wgk[7] * fc;
    double resg = wg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = half * xgk[i];
        const double f1 = f(center - dx);
        const double f2 = f(center + dx);
        resk += wgk[i] * (f1 + f2);
        if (i % 2 == 1) resg += wg[(i - 1) / 2] * (f1 + f2);
    }
    return {a, b, resk * half, std::fabs((resk - resg) * half)};
}

} // namespace detail

/// Globally adaptive Gauss-Kronrod quadrature of f over [a, b] targeting the
/// configured relative error. The worst interval is bisected until the summed
/// error estimate meets the target or the subdivision budget runs out.
template <typename F>
double integrate(F&& f, double a, double b, const QuadConfig& cfg = {}) {
    if (!(a <= b)) throw std::invalid_argument("integrate: need a <= b");
    if (!(cfg.rel_tolerance > 0.0)) throw std::invalid_argument("integrate: rel_tolerance must be > 0");
    if (a == b) return 0.0;

    std::priority_queue<detail::QuadInterval> queue;
    auto first = detail::gk15(f, a, b);
    if (!std::isfinite(first.integral)) {
        throw std::domain_error("integrate: integrand produced a non-finite value");
    }
    double total = first.integral;
    double total_abs = std::fabs(first.integral);
    double total_err = first.err;
    queue.push(first);

    int splits = 0;
    while (total_err > cfg.rel_tolerance * std::fmax(std::fabs(total), total_abs)) {
        if (splits >= cfg.max_subdivisions) throw AccuracyError(total, total_err);
        const detail::QuadInterval worst = queue.top();
        queue.pop();
        total -= worst.integral;
        total_abs -= std::fabs(worst.integral);
        total_err -= worst.err;
        const double mid = 0.5 * (worst.a + worst.b);
        for (const auto& piece : {detail::gk15(f, worst.a, mid), detail::gk15(f, mid, worst.b)}) {
            if (!std::isfinite(piece.integral)) {
                throw std::domain_error("integrate: integrand produced a non-finite value");
            }
            total += piece.integral;
            total_abs += std::fabs(piece.integral);
            total_err += piece.err;
            queue.push(piece);
        }
        ++splits;
    }
    return total;
}

} // namespace varbounds
