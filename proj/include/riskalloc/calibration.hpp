#pragma once

#include <span>
#include <vector>

#include "riskalloc/mortality_curve.hpp"
#include "riskalloc/rate_curve.hpp"

namespace riskalloc {

/// Two-parameter risk aversion term structure alpha(t) = a + b * sqrt(t).
struct AlphaFamily {
    double a = 1.0;
    double b = 0.1;

    double operator()(int t) const;

    /// alpha(1..term); throws std::domain_error if any value is <= 0.
    std::vector<double> alphas(int term) const;

    bool positive_over(int term) const;
};

/// Indifference premiums of unit-benefit term cover for every horizon
/// 1..max_term under the family.
std::vector<double> premium_curve(const AlphaFamily& family, const MortalityCurve& mortality,
                                  const RateCurve& rates, int max_term);

struct FitOptions {
    bool fit_b = true;          ///< false fits the constant family (b pinned at 0)
    bool multi_start = false;   ///< restart from 5 jittered initial points
    int max_iterations = 10000;
    double tolerance = 1e-12;   ///< simplex objective spread at convergence
    unsigned jitter_seed = 20070901;
};

struct FitReport {
    AlphaFamily family;
    double rss = 0.0;
    std::vector<double> residuals;      ///< fitted - target per term
    int iterations = 0;
    std::vector<double> best_rss_trace; ///< best objective after each iteration
};

/// Least-squares fit of the family to a premium-by-term target using
/// Nelder-Mead.  Parameter positivity is enforced by rejection; an initial
/// point whose whole simplex is infeasible throws std::domain_error.
FitReport fit_alpha(std::span<const double> target, const MortalityCurve& mortality,
                    const RateCurve& rates, AlphaFamily initial = {},
                    const FitOptions& options = {});

}  // namespace riskalloc
