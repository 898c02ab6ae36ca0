#pragma once

#include <vector>

namespace riskalloc {

/// Per-period exponential risk aversion coefficients.
///
/// Period t consumes utility u_t(x) = (1 - exp(-alpha_t x)) / alpha_t.  The
/// schedule also carries the tail aggregates beta_t defined by
/// 1/beta_t = sum_{k=t}^{T} 1/alpha_k; beta_1 is the risk aversion of the
/// whole horizon treated as a single period and beta_T == alpha_T.
class RiskAversionSchedule {
public:
    explicit RiskAversionSchedule(std::vector<double> alphas);

    /// Constant coefficient in every period.
    static RiskAversionSchedule constant(double alpha, int term);

    int term() const noexcept { return static_cast<int>(alpha_.size()); }
    const std::vector<double>& alphas() const noexcept { return alpha_; }

    /// alpha_t, t in [1, term].
    double alpha(int t) const;

    /// beta_t, t in [1, term].
    double beta(int t) const;

    /// Schedule with every coefficient multiplied by `factor` (> 0).
    RiskAversionSchedule scaled(double factor) const;

private:
    std::vector<double> alpha_;
    std::vector<double> beta_;
};

/// u_t(x): increasing, concave, u_t(0) = 0, u_t'(0) = 1.
double utility(const RiskAversionSchedule& schedule, int t, double x);

/// u_t'(x) = exp(-alpha_t x).
double marginal_utility(const RiskAversionSchedule& schedule, int t, double x);

}  // namespace riskalloc
