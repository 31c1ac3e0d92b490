#include "bvmi/evaluation.hpp"

#include <cmath>

namespace bvmi {

Eigen::VectorXd portfolio_weights(const ImputedPanel& imputed) {
    const Eigen::VectorXd sum =
        imputed.values().leftCols(imputed.t_train()).rowwise().sum();
    const double norm = sum.norm();
    if (norm == 0.0) return Eigen::VectorXd::Zero(sum.size());
    return sum / norm;
}

PortfolioResult portfolio_regret(const ImputedPanel& imputed,
                                 const ReturnsPanel& truth) {
    if (truth.n_assets() != imputed.n_assets() ||
        truth.t_total() != imputed.t_total() ||
        truth.t_train() != imputed.t_train() ||
        truth.t_test() != imputed.t_test() || truth.t_oos() != imputed.t_oos())
        throw DimensionError("imputed panel and truth panel splits disagree");
    if (truth.t_test() < 1 || truth.t_oos() < 1)
        throw ArgumentError("regret needs non-empty test and out-of-sample blocks");

    PortfolioResult result;
    result.weights = portfolio_weights(imputed);
    result.degenerate = result.weights.isZero(0.0);

    const auto block_mean = [&](int start, int len) {
        double acc = 0.0;
        for (int t = start; t < start + len; ++t)
            acc += result.weights.dot(truth.values().col(t));
        return acc / static_cast<double>(len);
    };
    result.test_return = block_mean(truth.t_train(), truth.t_test());
    result.oos_return =
        block_mean(truth.t_train() + truth.t_test(), truth.t_oos());
    result.regret = result.test_return - result.oos_return;
    return result;
}

EcmseRow ecmse(const std::vector<std::vector<double>>& regrets) {
    if (regrets.empty()) throw ArgumentError("ecmse needs at least 1 repetition");
    const std::size_t m = regrets.front().size();
    if (m < 2)
        throw ArgumentError("ecmse needs at least 2 imputations per repetition");
    for (const auto& rep : regrets)
        if (rep.size() != m)
            throw ArgumentError("all repetitions must have the same number of "
                                "imputations");

    EcmseRow row;
    row.repetitions = static_cast<int>(regrets.size());
    row.imputations = static_cast<int>(m);
    row.rep_means.reserve(regrets.size());
    row.rep_vars.reserve(regrets.size());

    double grand_sum = 0.0;
    double var_sum = 0.0;
    for (const auto& rep : regrets) {
        double mean = 0.0;
        for (double r : rep) mean += r;
        mean /= static_cast<double>(m);
        double ss = 0.0;
        for (double r : rep) ss += (r - mean) * (r - mean);
        const double var = ss / static_cast<double>(m - 1);
        row.rep_means.push_back(mean);
        row.rep_vars.push_back(var);
        grand_sum += mean;
        var_sum += var;
    }
    const double grand_mean = grand_sum / static_cast<double>(regrets.size());
    const double clamped = std::max(grand_mean, 0.0);
    row.ec_bias_sq = clamped * clamped;
    row.ec_var = var_sum / static_cast<double>(regrets.size());
    row.ec_mse = row.ec_bias_sq + row.ec_var;
    return row;
}

} // namespace bvmi
