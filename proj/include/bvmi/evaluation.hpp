#pragma once

#include <vector>

#include "bvmi/imputer.hpp"

namespace bvmi {

// Downstream portfolio evaluation of one imputed panel against the true
// panel: weights from the imputed training block, returns measured on the
// true testing and out-of-sample blocks.
struct PortfolioResult {
    Eigen::VectorXd weights;
    double test_return = 0.0; // average per-period portfolio return, test block
    double oos_return = 0.0;  // same, out-of-sample block
    double regret = 0.0;      // test_return - oos_return
    bool degenerate = false;  // training sum was the zero vector
};

// l2-normalized sum of the imputed training columns. A zero training sum
// yields the zero vector (flagged via PortfolioResult) instead of an error
// so Monte-Carlo sweeps survive degenerate draws.
Eigen::VectorXd portfolio_weights(const ImputedPanel& imputed);

// Requires the truth panel to share the imputed panel's shape and splits
// and to have non-empty test and out-of-sample blocks.
PortfolioResult portfolio_regret(const ImputedPanel& imputed,
                                 const ReturnsPanel& truth);

// Bias-variance decomposition of regret over K repetitions with M
// imputations each:
//
//   bias^2   max(grand mean of all K*M regrets, 0)^2      (one-sided)
//   variance mean over repetitions of the within-repetition sample
//            variance (M - 1 denominator)
//   mse      bias^2 + variance, exactly as computed
struct EcmseRow {
    double ec_bias_sq = 0.0;
    double ec_var = 0.0;
    double ec_mse = 0.0;
    int repetitions = 0;
    int imputations = 0;
    std::vector<double> rep_means; // per-repetition conditional means
    std::vector<double> rep_vars;  // per-repetition conditional variances
};

EcmseRow ecmse(const std::vector<std::vector<double>>& regrets);

} // namespace bvmi
