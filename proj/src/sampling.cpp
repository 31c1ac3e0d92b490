#include "bvmi/sampling.hpp"

namespace bvmi {

GaussianSampler::GaussianSampler(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)) {
    if (mean_.size() != cov.rows() || cov.rows() != cov.cols())
        throw DimensionError("sampler mean and covariance disagree");
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) {
        factor_ = llt.matrixL();
    } else {
        // Near-singular covariances (consensus at extreme weights, tiny
        // conditional noise blocks) land here.
        factor_ = spd_sqrt(cov);
    }
}

} // namespace bvmi
