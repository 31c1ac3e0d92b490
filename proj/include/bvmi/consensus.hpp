#pragma once

#include <limits>
#include <vector>

#include "bvmi/posterior.hpp"

namespace bvmi {

// Barycentric weights on a pair of posteriors, together with the bias
// budget that produced them. (lambda1, lambda2) live on the simplex. The
// delta fields are NaN for hand-built weights and are filled in by
// optimize_weights, whose output satisfies lambda2 * delta_max <= delta
// up to 1e-12.
class ConsensusWeights {
public:
    ConsensusWeights(double lambda1, double lambda2);
    ConsensusWeights(double lambda1, double lambda2, double delta,
                     double delta_max);

    double lambda1() const { return lambda1_; }
    double lambda2() const { return lambda2_; }
    double delta() const { return delta_; }
    double delta_max() const { return delta_max_; }

private:
    double lambda1_;
    double lambda2_;
    double delta_ = std::numeric_limits<double>::quiet_NaN();
    double delta_max_ = std::numeric_limits<double>::quiet_NaN();
};

// Consensus of two Gaussian posteriors. Precomputes the linear optimal
// transport map between the covariances,
//
//   Phi = S2^{1/2} (S2^{1/2} S1 S2^{1/2})^{-1/2} S2^{1/2},  Phi S1 Phi = S2,
//
// so that barycenters across a whole delta-grid share one pair of
// factorizations. The barycenter at weights (l1, l2) is
//
//   mean (l1 m1 + l2 m2), covariance (l1 I + l2 Phi) S1 (l1 I + l2 Phi),
//
// and its variance total is the quadratic
//
//   g(l2) = Tr(S1) l1^2 + 2 Tr(S1 Phi) l1 l2 + Tr(S2) l2^2,
//
// which optimize_weights minimizes subject to l2 * ||m1 - m2|| <= delta.
class Consensus {
public:
    Consensus(GaussianPosterior p1, GaussianPosterior p2);

    const GaussianPosterior& p1() const { return p1_; }
    const GaussianPosterior& p2() const { return p2_; }
    const Eigen::MatrixXd& transport_map() const { return phi_; }

    // ||mean1 - mean2||, the largest delta at which the bias constraint can
    // bind.
    double delta_max() const { return delta_max_; }

    GaussianPosterior barycenter(const ConsensusWeights& weights) const;

    // Variance total Tr(Sigma-hat) of the barycenter as a function of
    // lambda2 (closed form, no matrix assembly).
    double variance_total(double lambda2) const;

    // Minimizer of the variance total over the simplex subject to the bias
    // budget: a convex univariate quadratic clamped to
    // [0, min(1, delta / delta_max)]. When the quadratic degenerates to a
    // (near-)linear function, the feasible endpoint minimizing the linear
    // term is chosen; fully constant picks the upper endpoint, preferring
    // the lower-variance posterior within budget. delta_max = 0 (identical
    // means) makes the constraint vacuous.
    ConsensusWeights optimize_weights(double delta) const;

    // `count` equi-spaced bias budgets from 0 to delta_max inclusive.
    std::vector<double> delta_grid(int count = 10) const;

private:
    GaussianPosterior p1_;
    GaussianPosterior p2_;
    Eigen::MatrixXd phi_;
    double trace1_;      // Tr(S1)
    double trace2_;      // Tr(S2)
    double trace_cross_; // Tr(S1 Phi) = Tr((S2^{1/2} S1 S2^{1/2})^{1/2})
    double delta_max_;
};

// Free-function forms of the operations above, for one-shot use.
GaussianPosterior barycenter(const GaussianPosterior& p1,
                             const GaussianPosterior& p2,
                             const ConsensusWeights& weights);

ConsensusWeights optimize_weights(const GaussianPosterior& p1,
                                  const GaussianPosterior& p2, double delta);

std::vector<double> delta_grid(const GaussianPosterior& p1,
                               const GaussianPosterior& p2, int count = 10);

// Weighted transport cost l1 W2^2(candidate, p1) + l2 W2^2(candidate, p2).
// The barycenter minimizes this over all Gaussians; tests use it as the
// optimality certificate.
double barycenter_objective(const GaussianPosterior& p1,
                            const GaussianPosterior& p2,
                            const GaussianPosterior& candidate,
                            const ConsensusWeights& weights);

} // namespace bvmi
