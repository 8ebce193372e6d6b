#pragma once

#include <functional>
#include <optional>
#include <vector>

namespace varbounds {

/// Pareto(theta) loss distribution, F(x) = 1 - (1+x)^{-theta} on [0, inf).
struct ParetoMargin {
    double theta;

    explicit ParetoMargin(double shape);

    /// F^-(p) = (1-p)^{-1/theta} - 1. Returns +inf at p = 1.
    double quantile(double p) const;
    /// 1 - F(x) = (1+x)^{-theta} for x >= 0.
    double survival(double x) const;
    /// Closed-form integral of the survival function over [lo, hi].
    double survival_integral(double lo, double hi) const;

    bool has_finite_mean() const { return theta > 1.0; }
};

/// ES_alpha of a Pareto(theta) loss: F^-(alpha) + (1 + F^-(alpha)) / (theta - 1).
/// Requires theta > 1; the mean (and hence the tail mean) is infinite otherwise.
double expected_shortfall_pareto(double theta, double alpha);

/// A marginal loss distribution given by its quantile and survival functions.
///
/// Immutable after construction, so instances can be freely shared across
/// threads. Only the Pareto family ships as a built-in; any distribution can
/// be plugged in through the generic constructor.
class MarginalModel {
public:
    using ScalarFn = std::function<double(double)>;
    using IntervalFn = std::function<double(double, double)>;

    MarginalModel(ScalarFn quantile, ScalarFn survival, double support_infimum,
                  bool finite_mean, double density_decreasing_from = 0.0,
                  IntervalFn survival_integral = nullptr);

    static MarginalModel pareto(double theta);

    /// F^-(p) for p in [0, 1]. May be +inf at p = 1 for unbounded support.
    double quantile(double p) const;
    /// 1 - F(x) for x >= support infimum.
    double survival(double x) const;

    double support_infimum() const { return support_infimum_; }
    bool has_finite_mean() const { return finite_mean_; }
    /// Threshold beyond which the density is positive and decreasing.
    double density_decreasing_from() const { return beta_; }

    /// Shape parameter when this margin is a built-in Pareto, empty otherwise.
    const std::optional<double>& pareto_shape() const { return theta_; }

    bool has_survival_integral() const { return static_cast<bool>(survival_integral_); }
    /// Closed-form integral of the survival function over [lo, hi];
    /// only callable when has_survival_integral().
    double survival_integral(double lo, double hi) const;

private:
    ScalarFn quantile_;
    ScalarFn survival_;
    IntervalFn survival_integral_;
    double support_infimum_;
    bool finite_mean_;
    double beta_;
    std::optional<double> theta_;
};

/// d Pareto margins with the given shape parameters.
std::vector<MarginalModel> pareto_margins(const std::vector<double>& thetas);

} // namespace varbounds
