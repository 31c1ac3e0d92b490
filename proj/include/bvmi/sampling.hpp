#pragma once

#include <utility>

#include "bvmi/linalg.hpp"
#include "bvmi/posterior.hpp"
#include "bvmi/rng.hpp"

namespace bvmi {

// Multivariate normal sampler. Factorizes the covariance once (Cholesky,
// falling back to an eigendecomposition square root when the matrix is too
// close to singular for LLT) and then maps standard-normal vectors through
// mean + L z. The raw-matrix constructor accepts PSD covariances whose
// smallest eigenvalues may have rounded slightly negative, e.g. conditional
// covariances derived from a near-singular noise model.
class GaussianSampler {
public:
    GaussianSampler(Eigen::VectorXd mean, Eigen::MatrixXd cov);

    GaussianSampler(Eigen::VectorXd mean, const SpdMatrix& cov)
        : GaussianSampler(std::move(mean), cov.matrix()) {}

    explicit GaussianSampler(const GaussianPosterior& dist)
        : GaussianSampler(dist.mean(), dist.cov()) {}

    Eigen::VectorXd draw(Rng& rng) const {
        return mean_ + factor_ * rng.normal_vector(mean_.size());
    }

    Eigen::Index dim() const { return mean_.size(); }

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd factor_;
};

} // namespace bvmi
