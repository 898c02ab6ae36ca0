#include "riskalloc/mortality_curve.hpp"

#include <cmath>
#include <stdexcept>

namespace riskalloc {

MortalityCurve::MortalityCurve(std::vector<double> death_probs) : q_(std::move(death_probs)) {
    if (q_.empty()) throw std::invalid_argument("mortality curve needs at least one period");
    for (double q : q_) {
        if (!std::isfinite(q) || q < 0.0 || q > 1.0)
            throw std::domain_error("conditional death probability must lie in [0, 1]");
    }
}

double MortalityCurve::conditional_death_prob(int t) const {
    if (t < 1 || t > term()) throw std::out_of_range("conditional_death_prob: period out of range");
    return q_[static_cast<std::size_t>(t - 1)];
}

double MortalityCurve::death_prob(int t) const {
    if (t < 1 || t > term()) throw std::out_of_range("death_prob: period out of range");
    double alive = 1.0;
    for (int k = 1; k < t; ++k) alive *= 1.0 - q_[static_cast<std::size_t>(k - 1)];
    return alive * q_[static_cast<std::size_t>(t - 1)];
}

double MortalityCurve::survival_prob() const {
    double alive = 1.0;
    for (double q : q_) alive *= 1.0 - q;
    return alive;
}

bool MortalityCurve::degenerate() const noexcept {
    for (double q : q_) {
        if (q == 0.0 || q == 1.0) return true;
    }
    return false;
}

MortalityCurve MortalityCurve::prefix(int t) const {
    if (t < 1 || t > term()) throw std::out_of_range("prefix: length out of range");
    return MortalityCurve(std::vector<double>(q_.begin(), q_.begin() + t));
}

}  // namespace riskalloc
