#pragma once

#include <cstdint>
#include <vector>

#include "bvmi/panel.hpp"
#include "bvmi/posterior.hpp"
#include "bvmi/sampling.hpp"

namespace bvmi {

// Affine model of one column's missing block given the mean parameter theta
// and the observed values x:
//
//   missing | theta, x  ~  N(A theta + b(x), S)
//   A theta + b(x) = theta_Y + C (x - theta_X),   C = Omega_YX Omega_X^{-1}
//   S = Omega_Y - C Omega_XY
//
// where Y/X subscripts select the missing/observed index sets. A fully
// missing column degenerates to A = selection of Y, b = 0, S = Omega_Y.
class ConditionalModel {
public:
    ConditionalModel(const BoolColumn& mask_column, const NoiseModel& noise);

    const std::vector<int>& missing_indices() const { return missing_; }
    const std::vector<int>& observed_indices() const { return observed_; }
    Eigen::Index n_missing() const { return static_cast<Eigen::Index>(missing_.size()); }
    Eigen::Index n_observed() const { return static_cast<Eigen::Index>(observed_.size()); }
    Eigen::Index dim() const { return dim_; }

    // C = Omega_YX Omega_X^{-1}, the regression of the missing block onto
    // observed deviations. Empty when the column is fully missing.
    const Eigen::MatrixXd& regression() const { return regression_; }

    // S, the conditional covariance of the missing block.
    const Eigen::MatrixXd& noise_cov() const { return noise_cov_; }

    // A as a dense dim(Y) x n matrix (selection of Y minus C composed with
    // the selection of X).
    Eigen::MatrixXd coefficient_matrix() const;

    // b(x) = C x.
    Eigen::VectorXd offset(const Eigen::VectorXd& observed_values) const;

    // A theta + b(x), evaluated as theta_Y + C (x - theta_X).
    Eigen::VectorXd conditional_mean(const Eigen::VectorXd& theta,
                                     const Eigen::VectorXd& observed_values) const;

private:
    Eigen::Index dim_;
    std::vector<int> missing_;
    std::vector<int> observed_;
    Eigen::MatrixXd regression_;
    Eigen::MatrixXd noise_cov_;
};

// A completed panel: originally observed entries are preserved bit-exactly,
// masked entries carry imputed values. Keeps the mask it was produced under
// and the mean-parameter draw that generated it.
class ImputedPanel {
public:
    ImputedPanel(Eigen::MatrixXd values, MissingMask mask,
                 Eigen::VectorXd theta_draw, int t_train, int t_test,
                 int t_oos);

    const Eigen::MatrixXd& values() const { return values_; }
    const MissingMask& provenance() const { return mask_; }
    const Eigen::VectorXd& theta_draw() const { return theta_; }
    int n_assets() const { return static_cast<int>(values_.rows()); }
    int t_total() const { return static_cast<int>(values_.cols()); }
    int t_train() const { return t_train_; }
    int t_test() const { return t_test_; }
    int t_oos() const { return t_oos_; }

private:
    Eigen::MatrixXd values_;
    MissingMask mask_;
    Eigen::VectorXd theta_;
    int t_train_;
    int t_test_;
    int t_oos_;
};

enum class ImputationMode {
    // Fill with the conditional mean A theta + b; the per-column noise is
    // suppressed so that all imputation variability comes from the
    // mean-parameter draw.
    conditional_expectation,
    // Add an independent N(0, S) draw per column, the full sampling model.
    with_noise,
};

// m multiple imputations of the masked training entries. Imputation i uses
// the substream derive_seed(seed, i), draws theta from `posterior` once, and
// fills every masked column in ascending time order; parallel generation of
// different imputations therefore reproduces the serial output exactly.
std::vector<ImputedPanel> impute(const ReturnsPanel& panel,
                                 const MissingMask& mask,
                                 const GaussianPosterior& posterior,
                                 const NoiseModel& noise, std::uint64_t seed,
                                 int m, ImputationMode mode);

inline std::vector<ImputedPanel> impute_conditional_expectation(
    const ReturnsPanel& panel, const MissingMask& mask,
    const GaussianPosterior& posterior, const NoiseModel& noise,
    std::uint64_t seed, int m) {
    return impute(panel, mask, posterior, noise, seed, m,
                  ImputationMode::conditional_expectation);
}

inline std::vector<ImputedPanel> impute_with_noise(
    const ReturnsPanel& panel, const MissingMask& mask,
    const GaussianPosterior& posterior, const NoiseModel& noise,
    std::uint64_t seed, int m) {
    return impute(panel, mask, posterior, noise, seed, m,
                  ImputationMode::with_noise);
}

} // namespace bvmi
