#include "riskalloc/risk_aversion.hpp"

#include <cmath>
#include <stdexcept>

namespace riskalloc {

RiskAversionSchedule::RiskAversionSchedule(std::vector<double> alphas) : alpha_(std::move(alphas)) {
    if (alpha_.empty()) throw std::invalid_argument("risk aversion schedule needs >= 1 period");
    for (double a : alpha_) {
        if (!std::isfinite(a) || a <= 0.0)
            throw std::domain_error("risk aversion coefficients must be positive");
    }
    beta_.resize(alpha_.size());
    double tail = 0.0;
    for (std::size_t i = alpha_.size(); i-- > 0;) {
        tail += 1.0 / alpha_[i];
        beta_[i] = 1.0 / tail;
    }
}

RiskAversionSchedule RiskAversionSchedule::constant(double alpha, int term) {
    if (term < 1) throw std::invalid_argument("risk aversion schedule needs >= 1 period");
    return RiskAversionSchedule(std::vector<double>(static_cast<std::size_t>(term), alpha));
}

double RiskAversionSchedule::alpha(int t) const {
    if (t < 1 || t > term()) throw std::out_of_range("alpha: period out of range");
    return alpha_[static_cast<std::size_t>(t - 1)];
}

double RiskAversionSchedule::beta(int t) const {
    if (t < 1 || t > term()) throw std::out_of_range("beta: period out of range");
    return beta_[static_cast<std::size_t>(t - 1)];
}

RiskAversionSchedule RiskAversionSchedule::scaled(double factor) const {
    if (!std::isfinite(factor) || factor <= 0.0)
        throw std::domain_error("scaling factor must be positive");
    std::vector<double> scaled_alphas(alpha_);
    for (double& a : scaled_alphas) a *= factor;
    return RiskAversionSchedule(std::move(scaled_alphas));
}

double utility(const RiskAversionSchedule& schedule, int t, double x) {
    double a = schedule.alpha(t);
    // expm1 keeps precision near zero where the utility is almost linear
    return -std::expm1(-a * x) / a;
}

double marginal_utility(const RiskAversionSchedule& schedule, int t, double x) {
    return std::exp(-schedule.alpha(t) * x);
}

}  // namespace riskalloc
