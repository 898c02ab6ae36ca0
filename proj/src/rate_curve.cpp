#include "riskalloc/rate_curve.hpp"

#include <cmath>
#include <stdexcept>

namespace riskalloc {

RateCurve::RateCurve(std::vector<double> rates) : rates_(std::move(rates)) {
    if (rates_.empty()) throw std::invalid_argument("rate curve needs at least one period");
    bond_prices_.reserve(rates_.size() + 1);
    bond_prices_.push_back(1.0);
    for (double r : rates_) {
        if (!std::isfinite(r) || r <= -1.0)
            throw std::domain_error("period rate must be a finite number > -1");
        bond_prices_.push_back(bond_prices_.back() * (1.0 + r));
    }
}

RateCurve RateCurve::flat(double rate, int term) {
    if (term < 1) throw std::invalid_argument("rate curve needs at least one period");
    return RateCurve(std::vector<double>(static_cast<std::size_t>(term), rate));
}

double RateCurve::rate(int t) const {
    if (t < 1 || t > term()) throw std::out_of_range("rate: period out of range");
    return rates_[static_cast<std::size_t>(t - 1)];
}

double RateCurve::bond_price(int t) const {
    if (t < 0 || t > term()) throw std::out_of_range("bond_price: time out of range");
    return bond_prices_[static_cast<std::size_t>(t)];
}

double RateCurve::discount(double amount, int t) const { return amount / bond_price(t); }

RateCurve RateCurve::prefix(int t) const {
    if (t < 1 || t > term()) throw std::out_of_range("prefix: length out of range");
    return RateCurve(std::vector<double>(rates_.begin(), rates_.begin() + t));
}

}  // namespace riskalloc
