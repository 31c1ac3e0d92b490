#include "bvmi/posterior.hpp"

#include <map>
#include <sstream>
#include <vector>

namespace bvmi {

namespace {

int horizon_columns(const ReturnsPanel& panel, Horizon horizon) {
    return horizon == Horizon::train_only ? panel.t_train()
                                          : panel.t_train() + panel.t_test();
}

} // namespace

GaussianPosterior compute_posterior(const ReturnsPanel& panel,
                                    const MissingMask& mask,
                                    const NoiseModel& noise, const Prior& prior,
                                    Horizon horizon) {
    const int n = panel.n_assets();
    if (mask.n_assets() != n || mask.t_total() != panel.t_total() ||
        mask.t_train() != panel.t_train())
        throw DimensionError("panel and mask disagree");
    if (noise.dim() != n)
        throw DimensionError("noise covariance dimension does not match panel");
    if (!prior.is_flat() && prior.mean().size() != n)
        throw DimensionError("prior dimension does not match panel");

    const int t_k = horizon_columns(panel, horizon);

    // Flat prior: every asset must be observed somewhere within the horizon,
    // or the accumulated precision is singular. Columns past the training
    // block are complete, so only a training-only horizon can fail.
    if (prior.is_flat() && t_k <= panel.t_train()) {
        std::vector<int> uncovered;
        for (int i = 0; i < n; ++i) {
            bool seen = false;
            for (int t = 0; t < t_k && !seen; ++t) seen = !mask.mask()(i, t);
            if (!seen) uncovered.push_back(i);
        }
        if (!uncovered.empty()) {
            std::ostringstream os;
            os << "flat-prior precision is singular: " << uncovered.size()
               << " asset(s) have no observed entry within the horizon";
            throw CoverageError(os.str(), uncovered);
        }
    }

    Eigen::MatrixXd precision = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd weighted = Eigen::VectorXd::Zero(n);
    if (!prior.is_flat()) {
        const Eigen::LLT<Eigen::MatrixXd> prior_llt(prior.cov().matrix());
        if (prior_llt.info() != Eigen::Success)
            throw NotSpdError("prior covariance factorization failed");
        const Eigen::MatrixXd prior_precision =
            prior_llt.solve(Eigen::MatrixXd::Identity(n, n));
        precision += 0.5 * (prior_precision + prior_precision.transpose());
        weighted += prior_llt.solve(prior.mean());
    }

    // Fully observed fast path: Omega^{-1}, computed once.
    const Eigen::LLT<Eigen::MatrixXd> omega_llt(noise.omega().matrix());
    if (omega_llt.info() != Eigen::Success)
        throw NotSpdError("noise covariance factorization failed");
    Eigen::MatrixXd omega_inv;
    bool have_omega_inv = false;

    // Memoized Omega_{X_t}^{-1} keyed by observed index set; block patterns
    // repeat the same mask across many columns.
    std::map<std::vector<int>, Eigen::MatrixXd> inverse_cache;

    for (int t = 0; t < t_k; ++t) {
        const BoolColumn col = mask.column(t);
        const std::vector<int> observed = selected_indices(col, Block::observed);
        if (observed.empty()) continue; // fully missing column contributes nothing

        if (static_cast<int>(observed.size()) == n) {
            if (!have_omega_inv) {
                omega_inv = omega_llt.solve(Eigen::MatrixXd::Identity(n, n));
                omega_inv = 0.5 * (omega_inv + omega_inv.transpose()).eval();
                have_omega_inv = true;
            }
            precision += omega_inv;
            weighted += omega_inv * panel.values().col(t);
            continue;
        }

        auto it = inverse_cache.find(observed);
        if (it == inverse_cache.end()) {
            const Eigen::MatrixXd sub =
                project_matrix(noise.omega().matrix(), col, Block::observed);
            const Eigen::LLT<Eigen::MatrixXd> llt(sub);
            if (llt.info() != Eigen::Success)
                throw NotSpdError("observed-block covariance is not SPD");
            Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(
                sub.rows(), sub.cols()));
            inv = 0.5 * (inv + inv.transpose()).eval();
            it = inverse_cache.emplace(observed, std::move(inv)).first;
        }
        const Eigen::MatrixXd& sub_inv = it->second;
        const Eigen::VectorXd x_t =
            project(panel.values().col(t), col, Block::observed);
        precision += embed_observed_precision(sub_inv, observed, n);
        weighted += embed_observed_vector(sub_inv * x_t, observed, n);
    }

    const Eigen::LLT<Eigen::MatrixXd> post_llt(precision);
    if (post_llt.info() != Eigen::Success)
        throw NotSpdError("accumulated posterior precision is not SPD");
    Eigen::MatrixXd cov = post_llt.solve(Eigen::MatrixXd::Identity(n, n));
    cov = 0.5 * (cov + cov.transpose()).eval();
    Eigen::VectorXd mean = post_llt.solve(weighted);
    return GaussianPosterior(std::move(mean), SpdMatrix(std::move(cov)));
}

NestednessVerdict nestedness_check(const GaussianPosterior& p1,
                                   const GaussianPosterior& p2, double tol) {
    if (p1.dim() != p2.dim())
        throw DimensionError("posterior dimensions disagree");
    const Eigen::MatrixXd diff = p1.cov().matrix() - p2.cov().matrix();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        0.5 * (diff + diff.transpose()), Eigen::EigenvaluesOnly);
    const double min_eig = eig.eigenvalues().minCoeff();
    const double scale = std::max({1.0, p1.cov().matrix().cwiseAbs().maxCoeff(),
                                   p2.cov().matrix().cwiseAbs().maxCoeff()});
    return NestednessVerdict{min_eig >= -tol * scale, min_eig};
}

} // namespace bvmi
