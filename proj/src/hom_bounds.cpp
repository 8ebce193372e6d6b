#include "varbounds/hom_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace varbounds {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_alpha(double alpha, const char* what) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::domain_error(std::string(what) + ": alpha outside (0, 1)");
    }
}

void check_dimension(std::size_t d, const char* what) {
    if (d < 3) {
        throw std::domain_error(std::string(what) + ": requires d >= 3");
    }
}

/// F^-(1 - u) for a Pareto(theta) margin, u in (0, 1]; evaluated from the
/// tail probability directly to avoid forming 1 - u.
double pareto_tail_quantile(double u, double theta) {
    return std::expm1(-std::log(u) / theta);
}

} // namespace

CrudeBounds crude_var_bounds(const std::vector<MarginalModel>& margins, double alpha) {
    if (margins.empty()) throw std::domain_error("crude_var_bounds: no margins supplied");
    check_alpha(alpha, "crude_var_bounds");
    const double d = static_cast<double>(margins.size());
    const double p_lo = alpha / d;
    const double p_hi = 1.0 - (1.0 - alpha) / d;
    double q_min = std::numeric_limits<double>::infinity();
    double q_max = -std::numeric_limits<double>::infinity();
    for (const auto& m : margins) {
        q_min = std::fmin(q_min, m.quantile(p_lo));
        q_max = std::fmax(q_max, m.quantile(p_hi));
    }
    return {d * q_min, d * q_max};
}

DualProblem::DualProblem(MarginalModel m, std::size_t dim, double level, double s_lo, double s_hi)
    : margin(std::move(m)), d(dim), alpha(level), s_lower(s_lo), s_upper(s_hi) {
    check_dimension(d, "DualProblem");
    check_alpha(alpha, "DualProblem");
    if (!(std::isfinite(s_lower) && s_lower > 0.0)) {
        throw std::domain_error("DualProblem: s_lower must be finite and > 0");
    }
    if (!(t_floor >= margin.support_infimum())) {
        throw std::domain_error("DualProblem: t_floor below the support infimum");
    }
}

double dual_D(double s, double t, const DualProblem& problem) {
    const double d = static_cast<double>(problem.d);
    const double t_cap = s / d;
    if (!(t >= 0.0 && t <= t_cap)) {
        throw std::domain_error("dual_D: t outside [0, s/d]");
    }
    const double width = s - d * t;
    if (width <= 1e-13 * std::fmax(s, 1.0)) {
        return d * problem.margin.survival(t); // limit as t -> s/d
    }
    const double upper = s - (d - 1.0) * t;
    double integral;
    if (problem.margin.has_survival_integral()) {
        integral = problem.margin.survival_integral(t, upper);
    } else {
        integral = integrate([&](double x) { return problem.margin.survival(x); }, t, upper,
                             problem.quad);
    }
    return d / width * integral;
}

double dual_h(double s, double t, const DualProblem& problem) {
    const double d = static_cast<double>(problem.d);
    const double upper = s - (d - 1.0) * t;
    return dual_D(s, t, problem) -
           (problem.margin.survival(t) + (d - 1.0) * problem.margin.survival(upper));
}

DualMin dual_D_min(double s, const DualProblem& problem) {
    const double d = static_cast<double>(problem.d);
    if (!(std::isfinite(s) && s > 0.0)) throw std::domain_error("dual_D_min: s must be > 0");
    const double t_hi = s / d;
    if (!(problem.t_floor < t_hi)) {
        throw std::domain_error("dual_D_min: t interval [t_floor, s/d] is empty");
    }

    const double h_floor = dual_h(s, problem.t_floor, problem);
    RootConfig cfg = problem.inner_root;
    // h(s, s/d) = 0 identically, so the root finder would stop at the upper
    // end point immediately; overriding its value with -h(s, t_floor) lets an
    // interior root be detected.
    cfg.f_lower_override = h_floor;
    cfg.f_upper_override = -h_floor;
    const double t_star =
        find_root([&](double t) { return dual_h(s, t, problem); }, problem.t_floor, t_hi, cfg);

    // With the overridden end point, a missing interior root makes the search
    // collapse onto t = s/d; treat that as "s too small".
    const double resolution =
        2.0 * std::numeric_limits<double>::epsilon() * std::fabs(t_hi) + cfg.tolerance / 2.0;
    if (t_hi - t_star <= 8.0 * resolution && h_floor != 0.0) {
        throw STooSmallError(s);
    }

    const double upper = s - (d - 1.0) * t_star;
    const double d_value =
        problem.margin.survival(t_star) + (d - 1.0) * problem.margin.survival(upper);
    return {d_value, t_star};
}

double worst_var_dual(const DualProblem& problem) {
    const double s_lo = problem.s_lower;
    double s_hi = problem.s_upper;
    if (!(s_hi > s_lo)) {
        const double p_hi = 1.0 - (1.0 - problem.alpha) / static_cast<double>(problem.d);
        const double crude_upper = static_cast<double>(problem.d) * problem.margin.quantile(p_hi);
        s_hi = std::fmax(s_lo + 1.0, crude_upper);
    }
    const double target = 1.0 - problem.alpha;
    auto g = [&](double s) { return dual_D_min(s, problem).d_value - target; };

    const double g_lo = g(s_lo); // propagates STooSmallError with advice
    const double g_hi = g(s_hi);
    if (!((g_lo < 0.0 && g_hi > 0.0) || (g_lo > 0.0 && g_hi < 0.0) || g_lo == 0.0 || g_hi == 0.0)) {
        throw IntervalError("worst_var_dual: D(s) - (1-alpha) has no sign change over [s_l, s_u]",
                            g_lo, g_hi);
    }
    RootConfig cfg = problem.outer_root;
    cfg.f_lower_override = g_lo;
    cfg.f_upper_override = g_hi;
    return find_root(g, s_lo, s_hi, cfg);
}

// --- Wang's approach -------------------------------------------------------

WangProblem WangProblem::pareto(double theta, std::size_t d, double alpha) {
    check_dimension(d, "WangProblem");
    check_alpha(alpha, "WangProblem");
    const CInterval ci = wang_interval_pareto(theta, alpha, d);
    return WangProblem{WangMode::pareto_analytic, theta,       MarginalModel::pareto(theta), d,
                       alpha,                     ci.c_lower,  ci.c_upper,
                       RootConfig{},              QuadConfig{}};
}

WangProblem WangProblem::numeric(MarginalModel margin, std::size_t d, double alpha, double c_lower,
                                 double c_upper) {
    check_dimension(d, "WangProblem");
    check_alpha(alpha, "WangProblem");
    const double c_cap = (1.0 - alpha) / static_cast<double>(d);
    if (!(c_lower > 0.0 && c_lower < c_upper && c_upper < c_cap)) {
        throw std::domain_error("WangProblem: need 0 < c_lower < c_upper < (1-alpha)/d");
    }
    return WangProblem{WangMode::numeric_integral, kNaN,       std::move(margin), d,
                       alpha,                      c_lower,    c_upper,
                       RootConfig{},               QuadConfig{}};
}

ProbabilityPair wang_ab(double c, double alpha, std::size_t d) {
    check_alpha(alpha, "wang_ab");
    const double c_cap = (1.0 - alpha) / static_cast<double>(d);
    if (!(c >= 0.0 && c <= c_cap)) {
        throw std::domain_error("wang_ab: c outside [0, (1-alpha)/d]");
    }
    return {alpha + (static_cast<double>(d) - 1.0) * c, 1.0 - c};
}

namespace {

/// Ibar(c) for Pareto(theta) margins from the tail probabilities
/// u_a = 1 - a_c = (1-alpha) - (d-1)c and u_b = 1 - b_c = c. Written with
/// expm1 so the formula stays accurate both near theta = 1 and as
/// c -> (1-alpha)/d (where it tends to the quantile at 1-(1-alpha)/d).
double ibar_pareto(double c, double theta, double alpha, double d) {
    const double u_a = (1.0 - alpha) - (d - 1.0) * c;
    const double u_b = c;
    const double width = (1.0 - alpha) - d * c; // b_c - a_c
    if (c == 0.0) {
        if (theta <= 1.0) {
            throw std::domain_error("ibar: c = 0 not admissible for an infinite-mean margin");
        }
        return expected_shortfall_pareto(theta, alpha);
    }
    if (width <= 0.0) {
        return pareto_tail_quantile(u_b, theta); // limit at c = (1-alpha)/d
    }
    if (theta == 1.0) {
        // log(u_a/u_b)/width - 1
        return std::log1p(width / u_b) / width - 1.0;
    }
    const double p = 1.0 - 1.0 / theta;
    // (u_b^p - u_a^p) = u_a^p * expm1(p * log(u_b/u_a))
    const double diff = std::exp(p * std::log(u_a)) * std::expm1(-p * std::log1p(width / u_b));
    return (theta / (1.0 - theta)) * diff / width - 1.0;
}

} // namespace

double ibar(double c, const WangProblem& problem) {
    const double d = static_cast<double>(problem.d);
    const double c_cap = (1.0 - problem.alpha) / d;
    if (!(c >= 0.0 && c <= c_cap)) {
        throw std::domain_error("ibar: c outside [0, (1-alpha)/d]");
    }
    if (problem.mode != WangMode::numeric_integral) {
        return ibar_pareto(c, problem.theta, problem.alpha, d);
    }
    if (c == 0.0 && !problem.margin.has_finite_mean()) {
        throw std::domain_error("ibar: c = 0 not admissible for an infinite-mean margin");
    }
    const auto [a_c, b_c] = wang_ab(c, problem.alpha, problem.d);
    const double width = b_c - a_c;
    if (width <= 0.0) return problem.margin.quantile(b_c);
    const double integral =
        integrate([&](double y) { return problem.margin.quantile(y); }, a_c, b_c, problem.quad);
    return integral / width;
}

double wang_h(double c, const WangProblem& problem) {
    const double d = static_cast<double>(problem.d);
    const double mean = ibar(c, problem);
    double q_a, q_b;
    if (problem.mode != WangMode::numeric_integral) {
        const double u_a = (1.0 - problem.alpha) - (d - 1.0) * c;
        q_a = pareto_tail_quantile(u_a, problem.theta);
        q_b = pareto_tail_quantile(c, problem.theta);
    } else {
        const auto [a_c, b_c] = wang_ab(c, problem.alpha, problem.d);
        q_a = problem.margin.quantile(a_c);
        q_b = problem.margin.quantile(b_c);
    }
    return mean - ((d - 1.0) / d * q_a + q_b / d);
}

CInterval wang_interval_pareto(double theta, double alpha, std::size_t d) {
    if (!(std::isfinite(theta) && theta > 0.0)) {
        throw std::domain_error("wang_interval_pareto: theta must be > 0");
    }
    check_dimension(d, "wang_interval_pareto");
    check_alpha(alpha, "wang_interval_pareto");
    const double dd = static_cast<double>(d);
    const double tail = 1.0 - alpha;
    double c_lo, c_hi;
    if (theta == 1.0) {
        const double e = std::exp(1.0);
        c_lo = tail / (std::pow(dd + 1.0, e / (e - 1.0)) + dd - 1.0);
        c_hi = tail / (1.5 * dd - 1.0);
    } else {
        if (theta < 1.0) {
            c_lo = (1.0 - theta) * tail / dd;
        } else {
            c_lo = tail / (std::pow(dd / (theta - 1.0) + 1.0, theta) + dd - 1.0);
        }
        c_lo /= 2.0; // the theoretical end point can be numerically on the wrong side
        c_hi = tail * (dd - 1.0 + theta) / ((dd - 1.0) * (2.0 * theta + dd));
    }
    return {c_lo, c_hi};
}

namespace {

WangResult wang_result_from_c(double c_star, const WangProblem& problem, double x_star) {
    const double d = static_cast<double>(problem.d);
    const auto [a_c, b_c] = wang_ab(c_star, problem.alpha, problem.d);
    double value;
    if (problem.mode != WangMode::numeric_integral) {
        const double u_a = (1.0 - problem.alpha) - (d - 1.0) * c_star;
        value = (d - 1.0) * pareto_tail_quantile(u_a, problem.theta) +
                pareto_tail_quantile(c_star, problem.theta);
    } else {
        value = (d - 1.0) * problem.margin.quantile(a_c) + problem.margin.quantile(b_c);
    }
    const double d_ibar = d * ibar(c_star, problem);
    const double rel = value != 0.0 ? std::fabs(value - d_ibar) / std::fabs(value) : 0.0;
    return {value, c_star, a_c, b_c, d_ibar, rel, x_star};
}

} // namespace

WangResult worst_var_wang(const WangProblem& problem) {
    auto h = [&](double c) { return wang_h(c, problem); };
    const double f_lo = h(problem.c_lower);
    const double f_hi = h(problem.c_upper);
    if (!((f_lo < 0.0 && f_hi > 0.0) || (f_lo > 0.0 && f_hi < 0.0) || f_lo == 0.0 || f_hi == 0.0)) {
        throw IntervalError("worst_var_wang: h has no sign change at the initial interval", f_lo,
                            f_hi);
    }
    RootConfig cfg = problem.root;
    cfg.f_lower_override = f_lo;
    cfg.f_upper_override = f_hi;
    const double c_star = find_root(h, problem.c_lower, problem.c_upper, cfg);
    return wang_result_from_c(c_star, problem, kNaN);
}

// --- Transformed objective --------------------------------------------------

double wang_xc(double c, double alpha, std::size_t d) {
    check_alpha(alpha, "wang_xc");
    const double c_cap = (1.0 - alpha) / static_cast<double>(d);
    if (!(c > 0.0 && c < c_cap)) {
        throw std::domain_error("wang_xc: c outside (0, (1-alpha)/d)");
    }
    return (1.0 - alpha) / c - (static_cast<double>(d) - 1.0);
}

double wang_c_from_x(double x, double alpha, std::size_t d) {
    check_alpha(alpha, "wang_c_from_x");
    if (!(x > 1.0)) throw std::domain_error("wang_c_from_x: x outside (1, inf)");
    return (1.0 - alpha) / (x + static_cast<double>(d) - 1.0);
}

double wang_h2(double x, double theta, std::size_t d) {
    const double dd = static_cast<double>(d);
    if (std::fabs(theta - 1.0) < kThetaOneWindow) {
        return x * x + x * (-dd * std::log(x) + dd - 2.0) - (dd - 1.0);
    }
    const double inv = 1.0 / theta;
    return (dd / (1.0 - theta) - 1.0) * std::pow(x, 1.0 - inv) -
           (dd - 1.0) * std::pow(x, -inv) + x - (dd * theta / (1.0 - theta) + 1.0);
}

double wang_h2_inflection(double theta, std::size_t d) {
    const double dd = static_cast<double>(d);
    if (std::fabs(theta - 1.0) < kThetaOneWindow) return dd / 2.0;
    return (dd - 1.0) * (1.0 + theta) / (dd + theta - 1.0);
}

WangResult worst_var_wang_transformed(double theta, double alpha, std::size_t d,
                                      const RootConfig& root) {
    if (!(std::isfinite(theta) && theta > 0.0)) {
        throw std::domain_error("worst_var_wang_transformed: theta must be > 0");
    }
    check_dimension(d, "worst_var_wang_transformed");
    check_alpha(alpha, "worst_var_wang_transformed");
    const double dd = static_cast<double>(d);
    const bool near_one = std::fabs(theta - 1.0) < kThetaOneWindow;

    // h2 is strictly negative between the trivial root at 1 and its unique
    // inflection point, and grows to +inf; the nontrivial root lies between
    // the inflection point and the bound used to derive the c-interval.
    const double x_lo = wang_h2_inflection(theta, d);
    double x_hi;
    if (near_one) {
        const double e = std::exp(1.0);
        x_hi = std::pow(dd + 1.0, e / (e - 1.0));
    } else if (theta < 1.0) {
        x_hi = dd * theta / (1.0 - theta) + 1.0;
    } else {
        x_hi = std::pow(dd / (theta - 1.0) + 1.0, theta);
    }
    if (!near_one) x_hi = 2.0 * x_hi + (dd - 1.0); // mirrors halving c_l

    auto h2 = [&](double x) { return wang_h2(x, theta, d); };
    double f_lo = h2(x_lo);
    double f_hi = h2(x_hi);
    for (int attempt = 0; attempt < 64 && !(f_lo < 0.0 && f_hi > 0.0); ++attempt) {
        x_hi = 2.0 * x_hi + (dd - 1.0);
        f_hi = h2(x_hi);
    }
    if (!(f_lo < 0.0 && f_hi > 0.0)) {
        throw IntervalError("worst_var_wang_transformed: no bracket for the h2 root", f_lo, f_hi);
    }
    RootConfig cfg = root;
    cfg.f_lower_override = f_lo;
    cfg.f_upper_override = f_hi;
    const double x_star = find_root(h2, x_lo, x_hi, cfg);
    const double c_star = wang_c_from_x(x_star, alpha, d);

    WangProblem problem{WangMode::pareto_transformed, theta,       MarginalModel::pareto(theta), d,
                        alpha,                        c_star / 2.0, c_star * 2.0,
                        cfg,                          QuadConfig{}};
    return wang_result_from_c(c_star, problem, x_star);
}

} // namespace varbounds
