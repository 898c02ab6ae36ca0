#pragma once

#include <vector>

namespace riskalloc {

/// One-year conditional death probabilities for a single life.
///
/// Entry t (0-based) is the probability of dying in period t+1 given
/// survival to time t.  Values must lie in [0, 1]; the degenerate endpoints
/// are accepted here and rejected by the operations that need interior
/// probabilities.
class MortalityCurve {
public:
    explicit MortalityCurve(std::vector<double> death_probs);

    int term() const noexcept { return static_cast<int>(q_.size()); }
    const std::vector<double>& conditional_death_probs() const noexcept { return q_; }

    /// q_{t-1}: probability of death in period t given alive at t-1, t in [1, term].
    double conditional_death_prob(int t) const;

    /// Unconditional probability of death in period t, t in [1, term].
    double death_prob(int t) const;

    /// Probability of surviving all `term` periods.
    double survival_prob() const;

    /// Whether any entry is exactly 0 or 1.
    bool degenerate() const noexcept;

    /// Curve restricted to the first `t` periods.
    MortalityCurve prefix(int t) const;

private:
    std::vector<double> q_;
};

}  // namespace riskalloc
