#pragma once

#include <span>
#include <vector>

namespace riskalloc {

/// Deterministic term structure of one-period interest rates.
///
/// Period t (1-based) accrues at rate r_t, so a unit invested at time 0 is
/// worth bond_price(t) = prod_{k<=t} (1 + r_k) at time t.  Rates must be
/// > -1; bond prices are therefore positive and bond_price(0) == 1.
class RateCurve {
public:
    explicit RateCurve(std::vector<double> rates);

    /// Curve with the same rate in every period.
    static RateCurve flat(double rate, int term);

    int term() const noexcept { return static_cast<int>(rates_.size()); }
    const std::vector<double>& rates() const noexcept { return rates_; }

    /// Rate for period t, t in [1, term].
    double rate(int t) const;

    /// Value at time t of a unit invested at time 0; t in [0, term].
    double bond_price(int t) const;

    /// Time-0 value of `amount` paid at time t.
    double discount(double amount, int t) const;

    /// Curve restricted to the first `t` periods.
    RateCurve prefix(int t) const;

private:
    std::vector<double> rates_;
    std::vector<double> bond_prices_;
};

}  // namespace riskalloc
