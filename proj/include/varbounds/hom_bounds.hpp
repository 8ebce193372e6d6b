#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "varbounds/margins.hpp"
#include "varbounds/numerics.hpp"

namespace varbounds {

/// Dependence-free bounds on the alpha-quantile of a sum of losses:
/// d * min_j F_j^-(alpha/d) <= VaR_alpha <= d * max_j F_j^-(1 - (1-alpha)/d).
/// Valid for any joint distribution with the given margins.
struct CrudeBounds {
    double lower;
    double upper;
};
CrudeBounds crude_var_bounds(const std::vector<MarginalModel>& margins, double alpha);

/// Raised when the inner minimization of the dual bound finds no interior
/// stationary point, which happens when the outer candidate s is too small.
struct STooSmallError : std::runtime_error {
    double s;
    explicit STooSmallError(double s_value)
        : std::runtime_error("dual bound: no interior root of h(s, .) at s = " +
                             std::to_string(s_value) +
                             "; enlarge the lower end point of the s interval"),
          s(s_value) {}
};

/// Raised when an objective does not change sign over the supplied interval.
struct IntervalError : std::runtime_error {
    double f_lo;
    double f_hi;
    IntervalError(const std::string& what, double flo, double fhi)
        : std::runtime_error(what + " (f(lo)=" + std::to_string(flo) +
                             ", f(hi)=" + std::to_string(fhi) + ")"),
          f_lo(flo),
          f_hi(fhi) {}
};

/// Worst-VaR computation via the dual bound
///   D(s,t) = d/(s-dt) * Int_t^{s-(d-1)t} survival(x) dx,
///   D(s)   = min_{t in [0, s/d]} D(s,t),
/// solved by nested root finding. Requires a margin with F(0) = 0 and
/// F(x) < 1 for all x, and d >= 3.
struct DualProblem {
    MarginalModel margin;
    std::size_t d;
    double alpha;
    double s_lower; ///< outer interval start; must be "sufficiently large"
    double s_upper; ///< outer interval end; <= s_lower means use the default
    double t_floor = 0.0;
    RootConfig inner_root{};
    RootConfig outer_root{};
    QuadConfig quad{};

    DualProblem(MarginalModel m, std::size_t dim, double level, double s_lo, double s_hi = 0.0);
};

/// D(s,t). At t = s/d this is the limit d * survival(s/d). Uses the margin's
/// closed-form survival integral when available, quadrature otherwise.
double dual_D(double s, double t, const DualProblem& problem);

/// Inner objective h(s,t) = D(s,t) - (survival(t) + (d-1) survival(s-(d-1)t)).
/// Vanishes identically at t = s/d.
double dual_h(double s, double t, const DualProblem& problem);

struct DualMin {
    double d_value; ///< D(s), evaluated through the survival form
    double t_star;  ///< interior root of h(s, .)
};

/// Minimizes D(s, .) by locating the interior root of h(s, .). The upper end
/// point value is overridden with -h(s, t_floor) since h(s, s/d) = 0 for
/// every s. Throws STooSmallError when the search collapses onto t = s/d,
/// i.e. when no interior root exists.
DualMin dual_D_min(double s, const DualProblem& problem);

/// Outer root of D(s) = 1 - alpha over [s_lower, s_upper]; the root is the
/// worst VaR_alpha. The default upper end point is
/// max(s_lower + 1, crude upper bound).
double worst_var_dual(const DualProblem& problem);

// --- Wang's approach -------------------------------------------------------

enum class WangMode { numeric_integral, pareto_analytic, pareto_transformed };

/// Worst-VaR computation via the smallest c in (0, (1-alpha)/d] with
/// Ibar(c) >= (d-1)/d F^-(a_c) + 1/d F^-(b_c), where a_c = alpha + (d-1)c and
/// b_c = 1 - c. Requires d > 2.
struct WangProblem {
    WangMode mode;
    double theta; ///< Pareto shape; NaN in numeric mode
    MarginalModel margin;
    std::size_t d;
    double alpha;
    double c_lower;
    double c_upper;
    RootConfig root{};
    QuadConfig quad{};

    /// Analytic Pareto problem; the c interval comes from wang_interval_pareto.
    static WangProblem pareto(double theta, std::size_t d, double alpha);
    /// Generic margin with quadrature for Ibar; the caller supplies the c
    /// interval (no generic interval construction is attempted).
    static WangProblem numeric(MarginalModel margin, std::size_t d, double alpha, double c_lower,
                               double c_upper);
};

struct ProbabilityPair {
    double a_c;
    double b_c;
};

/// (a_c, b_c) = (alpha + (d-1)c, 1 - c) for c in [0, (1-alpha)/d].
ProbabilityPair wang_ab(double c, double alpha, std::size_t d);

/// Ibar(c): mean of the quantile function over [a_c, b_c]. Closed form in the
/// Pareto modes (both the theta != 1 and theta = 1 branches), quadrature in
/// numeric mode. At c = (1-alpha)/d returns the limit F^-(1-(1-alpha)/d).
/// c = 0 is only admissible for finite-mean margins (it yields ES_alpha).
double ibar(double c, const WangProblem& problem);

/// h(c) = Ibar(c) - ((d-1)/d F^-(a_c) + 1/d F^-(b_c)); h((1-alpha)/d) = 0.
double wang_h(double c, const WangProblem& problem);

struct CInterval {
    double c_lower;
    double c_upper;
};

/// Initial interval [c_l, c_u] for Pareto(theta) margins. The returned lower
/// end point is half the theoretical one when theta != 1 so that h is of
/// opposite sign at the end points in floating point as well.
CInterval wang_interval_pareto(double theta, double alpha, std::size_t d);

struct WangResult {
    double value;           ///< (d-1) F^-(a_{c*}) + F^-(b_{c*})
    double c_star;
    double a_c;
    double b_c;
    double d_ibar;          ///< cross check d * Ibar(c*); equals value at an exact root
    double rel_discrepancy; ///< |value - d_ibar| / |value|
    double x_star;          ///< root in the transformed variable; NaN otherwise
};

WangResult worst_var_wang(const WangProblem& problem);

// --- Transformed Wang objective on (1, inf) --------------------------------

/// Switch width around theta = 1 below which the transformed objective uses
/// the theta = 1 closed form; the 1/(1-theta) coefficients cancel
/// catastrophically inside this window.
inline constexpr double kThetaOneWindow = 1e-6;

/// x_c = (1-alpha)/c - (d-1), a strictly decreasing bijection from
/// c in (0, (1-alpha)/d) onto (1, inf).
double wang_xc(double c, double alpha, std::size_t d);
double wang_c_from_x(double x, double alpha, std::size_t d);

/// Transformed objective h2 with h2(1) = 0 and a unique further root on
/// (1, inf) for d > 2.
double wang_h2(double x, double theta, std::size_t d);

/// The unique inflection point of h2: (d-1)(1+theta)/(d+theta-1) for
/// theta != 1 and d/2 for theta = 1. Lies strictly below the nontrivial root
/// and therefore serves as a lower bracket end point.
double wang_h2_inflection(double theta, std::size_t d);

/// Worst VaR through the root of h2 on (1, inf), mapped back to c.
WangResult worst_var_wang_transformed(double theta, double alpha, std::size_t d,
                                      const RootConfig& root = {});

} // namespace varbounds
