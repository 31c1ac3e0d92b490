#include "bvmi/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace bvmi {

namespace {

// Degeneracy threshold for the quadratic coefficients, relative to the
// variance scale of the pair.
double coefficient_floor(double trace1, double trace2) {
    return 1e-14 * std::max(1.0, trace1 + trace2);
}

} // namespace

ConsensusWeights::ConsensusWeights(double lambda1, double lambda2)
    : lambda1_(lambda1), lambda2_(lambda2) {
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) ||
        std::abs(lambda1 + lambda2 - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "weights (" << lambda1 << ", " << lambda2
           << ") are not on the simplex";
        throw ArgumentError(os.str());
    }
}

ConsensusWeights::ConsensusWeights(double lambda1, double lambda2, double delta,
                                   double delta_max)
    : ConsensusWeights(lambda1, lambda2) {
    if (delta < 0.0 || delta_max < 0.0)
        throw ArgumentError("bias budget must be non-negative");
    delta_ = delta;
    delta_max_ = delta_max;
}

Consensus::Consensus(GaussianPosterior p1, GaussianPosterior p2)
    : p1_(std::move(p1)), p2_(std::move(p2)) {
    if (p1_.dim() != p2_.dim())
        throw DimensionError("posterior dimensions disagree");

    const Eigen::MatrixXd root2 = spd_sqrt(p2_.cov().matrix());
    Eigen::MatrixXd inner = root2 * p1_.cov().matrix() * root2;
    inner = 0.5 * (inner + inner.transpose()).eval();

    // One eigendecomposition of the inner matrix yields both its inverse
    // square root (for Phi) and the trace of its square root (= Tr(S1 Phi)).
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(inner);
    if (eig.info() != Eigen::Success)
        throw NotSpdError("transport map eigendecomposition failed");
    Eigen::VectorXd vals = eig.eigenvalues();
    const double clamp = 1e-12 * std::max(vals.maxCoeff(), 0.0);
    if (clamp <= 0.0 || vals.minCoeff() < -clamp)
        throw NotSpdError("covariance product is not positive semidefinite");
    trace_cross_ = 0.0;
    Eigen::VectorXd inv_roots(vals.size());
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
        const double v = std::max(vals[i], clamp);
        trace_cross_ += std::sqrt(v);
        inv_roots[i] = 1.0 / std::sqrt(v);
    }
    const Eigen::MatrixXd inner_inv_root =
        eig.eigenvectors() * inv_roots.asDiagonal() *
        eig.eigenvectors().transpose();
    phi_ = root2 * inner_inv_root * root2;
    phi_ = 0.5 * (phi_ + phi_.transpose()).eval();

    trace1_ = p1_.cov().trace();
    trace2_ = p2_.cov().trace();
    delta_max_ = (p1_.mean() - p2_.mean()).norm();
}

GaussianPosterior Consensus::barycenter(const ConsensusWeights& weights) const {
    const double l1 = weights.lambda1();
    const double l2 = weights.lambda2();
    Eigen::VectorXd mean = l1 * p1_.mean() + l2 * p2_.mean();
    const Eigen::MatrixXd blend =
        l1 * Eigen::MatrixXd::Identity(p1_.dim(), p1_.dim()) + l2 * phi_;
    Eigen::MatrixXd cov = blend * p1_.cov().matrix() * blend;
    cov = 0.5 * (cov + cov.transpose()).eval();
    return GaussianPosterior(std::move(mean), SpdMatrix(std::move(cov)));
}

double Consensus::variance_total(double lambda2) const {
    const double l1 = 1.0 - lambda2;
    return trace1_ * l1 * l1 + 2.0 * trace_cross_ * l1 * lambda2 +
           trace2_ * lambda2 * lambda2;
}

ConsensusWeights Consensus::optimize_weights(double delta) const {
    if (delta < 0.0)
        throw ArgumentError("bias budget must be non-negative");

    // Infinity when the means coincide: the constraint is vacuous.
    const double budget_cap =
        delta_max_ > 0.0 ? delta / delta_max_
                         : std::numeric_limits<double>::infinity();
    const double upper = std::min(1.0, budget_cap);

    // g(l2) = trace1 + b l2 + a l2^2 after substituting l1 = 1 - l2.
    const double a = trace1_ + trace2_ - 2.0 * trace_cross_;
    const double b = 2.0 * (trace_cross_ - trace1_);
    const double floor = coefficient_floor(trace1_, trace2_);

    double lambda2;
    if (a > floor) {
        lambda2 = std::clamp(-b / (2.0 * a), 0.0, upper);
    } else if (b > floor) {
        lambda2 = 0.0;
    } else if (b < -floor) {
        lambda2 = upper;
    } else {
        // Constant objective: prefer the lower-variance posterior within the
        // budget.
        lambda2 = upper;
    }
    return ConsensusWeights(1.0 - lambda2, lambda2, delta, delta_max_);
}

std::vector<double> Consensus::delta_grid(int count) const {
    if (count < 2)
        throw ArgumentError("delta grid needs at least 2 points");
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        grid[static_cast<std::size_t>(i)] =
            delta_max_ * static_cast<double>(i) / static_cast<double>(count - 1);
    return grid;
}

GaussianPosterior barycenter(const GaussianPosterior& p1,
                             const GaussianPosterior& p2,
                             const ConsensusWeights& weights) {
    return Consensus(p1, p2).barycenter(weights);
}

ConsensusWeights optimize_weights(const GaussianPosterior& p1,
                                  const GaussianPosterior& p2, double delta) {
    return Consensus(p1, p2).optimize_weights(delta);
}

std::vector<double> delta_grid(const GaussianPosterior& p1,
                               const GaussianPosterior& p2, int count) {
    return Consensus(p1, p2).delta_grid(count);
}

double barycenter_objective(const GaussianPosterior& p1,
                            const GaussianPosterior& p2,
                            const GaussianPosterior& candidate,
                            const ConsensusWeights& weights) {
    return weights.lambda1() * gaussian_w2_squared(candidate, p1) +
           weights.lambda2() * gaussian_w2_squared(candidate, p2);
}

} // namespace bvmi
