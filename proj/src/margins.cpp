#include "varbounds/margins.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace varbounds {

namespace {

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::domain_error(std::string(what) + ": probability " + std::to_string(p) +
                                " outside [0, 1]");
    }
}

} // namespace

ParetoMargin::ParetoMargin(double shape) : theta(shape) {
    if (!(std::isfinite(shape) && shape > 0.0)) {
        throw std::invalid_argument("ParetoMargin: shape must be finite and > 0");
    }
}

double ParetoMargin::quantile(double p) const {
    check_probability(p, "ParetoMargin::quantile");
    // (1-p)^{-1/theta} - 1, written via expm1/log1p; exact 0 at p = 0 and
    // +inf at p = 1.
    return std::expm1(-std::log1p(-p) / theta);
}

double ParetoMargin::survival(double x) const {
    if (!(x >= 0.0)) {
        throw std::domain_error("ParetoMargin::survival: x below the support infimum 0");
    }
    return std::exp(-theta * std::log1p(x));
}

double ParetoMargin::survival_integral(double lo, double hi) const {
    if (!(lo >= 0.0 && hi >= lo)) {
        throw std::domain_error("ParetoMargin::survival_integral: need 0 <= lo <= hi");
    }
    if (lo == hi) return 0.0;
    if (theta == 1.0) {
        // log((1+hi)/(1+lo)), kept stable for hi close to lo.
        return std::log1p((hi - lo) / (1.0 + lo));
    }
    // ((1+lo)^{1-theta} - (1+hi)^{1-theta}) / (theta - 1), rewritten with
    // expm1 so that nearby endpoints do not cancel.
    const double log_ratio = -std::log1p((hi - lo) / (1.0 + lo)); // log((1+lo)/(1+hi))
    return std::exp((1.0 - theta) * std::log1p(hi)) * std::expm1((1.0 - theta) * log_ratio) /
           (theta - 1.0);
}

double expected_shortfall_pareto(double theta, double alpha) {
    if (!(std::isfinite(theta) && theta > 0.0)) {
        throw std::invalid_argument("expected_shortfall_pareto: shape must be finite and > 0");
    }
    if (theta <= 1.0) {
        throw std::domain_error("expected_shortfall_pareto: infinite mean for theta <= 1");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::domain_error("expected_shortfall_pareto: alpha outside (0, 1)");
    }
    const double one_plus_q = std::exp(-std::log1p(-alpha) / theta); // (1-alpha)^{-1/theta}
    return (one_plus_q - 1.0) + one_plus_q / (theta - 1.0);
}

MarginalModel::MarginalModel(ScalarFn quantile, ScalarFn survival, double support_infimum,
                             bool finite_mean, double density_decreasing_from,
                             IntervalFn survival_integral)
    : quantile_(std::move(quantile)),
      survival_(std::move(survival)),
      survival_integral_(std::move(survival_integral)),
      support_infimum_(support_infimum),
      finite_mean_(finite_mean),
      beta_(density_decreasing_from) {
    if (!quantile_ || !survival_) {
        throw std::invalid_argument("MarginalModel: quantile and survival functions required");
    }
}

MarginalModel MarginalModel::pareto(double theta) {
    ParetoMargin par(theta);
    MarginalModel m([par](double p) { return par.quantile(p); },
                    [par](double x) { return par.survival(x); },
                    /*support_infimum=*/0.0, par.has_finite_mean(),
                    /*density_decreasing_from=*/0.0,
                    [par](double lo, double hi) { return par.survival_integral(lo, hi); });
    m.theta_ = theta;
    return m;
}

double MarginalModel::quantile(double p) const {
    check_probability(p, "MarginalModel::quantile");
    return quantile_(p);
}

double MarginalModel::survival(double x) const {
    if (!(x >= support_infimum_)) {
        throw std::domain_error("MarginalModel::survival: x below the support infimum");
    }
    return survival_(x);
}

double MarginalModel::survival_integral(double lo, double hi) const {
    if (!survival_integral_) {
        throw std::logic_error("MarginalModel::survival_integral: no closed form available");
    }
    return survival_integral_(lo, hi);
}

std::vector<MarginalModel> pareto_margins(const std::vector<double>& thetas) {
    std::vector<MarginalModel> out;
    out.reserve(thetas.size());
    for (double theta : thetas) out.push_back(MarginalModel::pareto(theta));
    return out;
}

} // namespace varbounds
