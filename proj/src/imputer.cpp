#include "bvmi/imputer.hpp"

#include <memory>
#include <utility>

namespace bvmi {

ConditionalModel::ConditionalModel(const BoolColumn& mask_column,
                                   const NoiseModel& noise)
    : dim_(mask_column.size()) {
    if (noise.dim() != dim_)
        throw DimensionError("mask column and noise covariance disagree");
    missing_ = selected_indices(mask_column, Block::missing);
    observed_ = selected_indices(mask_column, Block::observed);

    const Eigen::MatrixXd& omega = noise.omega().matrix();
    const Eigen::Index ny = n_missing();
    const Eigen::Index nx = n_observed();

    if (nx == 0) {
        // Fully missing column: no conditioning information.
        regression_ = Eigen::MatrixXd(ny, 0);
        noise_cov_ = project_matrix(omega, mask_column, Block::missing);
        return;
    }

    const Eigen::MatrixXd omega_x =
        project_matrix(omega, mask_column, Block::observed);
    const Eigen::MatrixXd omega_yx =
        project_matrix(omega, mask_column, Block::missing, Block::observed);
    const Eigen::LLT<Eigen::MatrixXd> llt(omega_x);
    if (llt.info() != Eigen::Success)
        throw NotSpdError("observed-block covariance is not SPD");
    // C = Omega_YX Omega_X^{-1}, via the transposed solve.
    regression_ = llt.solve(omega_yx.transpose()).transpose();

    Eigen::MatrixXd s = project_matrix(omega, mask_column, Block::missing) -
                        regression_ * omega_yx.transpose();
    noise_cov_ = 0.5 * (s + s.transpose());
}

Eigen::MatrixXd ConditionalModel::coefficient_matrix() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_missing(), dim_);
    for (Eigen::Index r = 0; r < n_missing(); ++r)
        a(r, missing_[static_cast<std::size_t>(r)]) = 1.0;
    for (Eigen::Index c = 0; c < n_observed(); ++c) {
        const int col = observed_[static_cast<std::size_t>(c)];
        a.col(col) -= regression_.col(c);
    }
    return a;
}

Eigen::VectorXd ConditionalModel::offset(
    const Eigen::VectorXd& observed_values) const {
    if (observed_values.size() != n_observed())
        throw DimensionError("observed values length mismatch");
    return regression_ * observed_values;
}

Eigen::VectorXd ConditionalModel::conditional_mean(
    const Eigen::VectorXd& theta,
    const Eigen::VectorXd& observed_values) const {
    if (theta.size() != dim_)
        throw DimensionError("theta dimension mismatch");
    if (observed_values.size() != n_observed())
        throw DimensionError("observed values length mismatch");
    Eigen::VectorXd theta_y(n_missing());
    for (Eigen::Index r = 0; r < n_missing(); ++r)
        theta_y[r] = theta[missing_[static_cast<std::size_t>(r)]];
    if (n_observed() == 0) return theta_y;
    Eigen::VectorXd theta_x(n_observed());
    for (Eigen::Index c = 0; c < n_observed(); ++c)
        theta_x[c] = theta[observed_[static_cast<std::size_t>(c)]];
    return theta_y + regression_ * (observed_values - theta_x);
}

ImputedPanel::ImputedPanel(Eigen::MatrixXd values, MissingMask mask,
                           Eigen::VectorXd theta_draw, int t_train, int t_test,
                           int t_oos)
    : values_(std::move(values)), mask_(std::move(mask)),
      theta_(std::move(theta_draw)), t_train_(t_train), t_test_(t_test),
      t_oos_(t_oos) {
    if (values_.rows() != mask_.n_assets() || values_.cols() != mask_.t_total())
        throw DimensionError("imputed values and mask disagree");
    if (t_train_ + t_test_ + t_oos_ != static_cast<int>(values_.cols()))
        throw DimensionError("imputed panel splits do not sum to its length");
}

namespace {

struct ColumnWork {
    int t;
    ConditionalModel model;
    Eigen::VectorXd observed_values;
    GaussianSampler* noise_sampler = nullptr; // set in with_noise mode
};

} // namespace

std::vector<ImputedPanel> impute(const ReturnsPanel& panel,
                                 const MissingMask& mask,
                                 const GaussianPosterior& posterior,
                                 const NoiseModel& noise, std::uint64_t seed,
                                 int m, ImputationMode mode) {
    if (m < 1) throw ArgumentError("imputation count must be >= 1");
    const int n = panel.n_assets();
    if (mask.n_assets() != n || mask.t_total() != panel.t_total() ||
        mask.t_train() != panel.t_train())
        throw DimensionError("panel and mask disagree");
    if (posterior.dim() != n)
        throw DimensionError("posterior dimension does not match panel");
    if (noise.dim() != n)
        throw DimensionError("noise covariance does not match panel");

    // Per-column models depend only on (mask, noise, observed values), so
    // they are shared across all m imputations. Only masked columns matter;
    // those all live in the training block.
    std::vector<ColumnWork> columns;
    std::vector<std::unique_ptr<GaussianSampler>> noise_samplers;
    for (int t = 0; t < panel.t_train(); ++t) {
        const BoolColumn col = mask.column(t);
        if (!col.any()) continue;
        ColumnWork work{t, ConditionalModel(col, noise),
                        project(panel.values().col(t), col, Block::observed),
                        nullptr};
        if (mode == ImputationMode::with_noise) {
            noise_samplers.push_back(std::make_unique<GaussianSampler>(
                Eigen::VectorXd::Zero(work.model.n_missing()),
                work.model.noise_cov()));
            work.noise_sampler = noise_samplers.back().get();
        }
        columns.push_back(std::move(work));
    }

    const GaussianSampler theta_sampler(posterior);

    std::vector<ImputedPanel> out;
    out.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        const Eigen::VectorXd theta = theta_sampler.draw(rng);
        Eigen::MatrixXd values = panel.values();
        for (const ColumnWork& work : columns) {
            Eigen::VectorXd filled =
                work.model.conditional_mean(theta, work.observed_values);
            if (work.noise_sampler != nullptr)
                filled += work.noise_sampler->draw(rng);
            const std::vector<int>& rows = work.model.missing_indices();
            for (std::size_t r = 0; r < rows.size(); ++r)
                values(rows[r], work.t) = filled[static_cast<Eigen::Index>(r)];
        }
        out.emplace_back(std::move(values), mask, theta, panel.t_train(),
                         panel.t_test(), panel.t_oos());
    }
    return out;
}

} // namespace bvmi
