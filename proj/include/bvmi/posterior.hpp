#pragma once

#include <optional>
#include <utility>

#include "bvmi/linalg.hpp"
#include "bvmi/panel.hpp"

namespace bvmi {

// Gaussian distribution of the n-dimensional mean parameter.
class GaussianPosterior {
public:
    GaussianPosterior(Eigen::VectorXd mean, SpdMatrix cov)
        : mean_(std::move(mean)), cov_(std::move(cov)) {
        if (mean_.size() != cov_.dim())
            throw DimensionError("mean and covariance dimensions disagree");
    }

    const Eigen::VectorXd& mean() const { return mean_; }
    const SpdMatrix& cov() const { return cov_; }
    Eigen::Index dim() const { return mean_.size(); }

private:
    Eigen::VectorXd mean_;
    SpdMatrix cov_;
};

inline double gaussian_w2_squared(const GaussianPosterior& a,
                                  const GaussianPosterior& b) {
    return gaussian_w2_squared(a.mean(), a.cov(), b.mean(), b.cov());
}

// Prior on the mean parameter: non-informative flat, or Gaussian.
class Prior {
public:
    static Prior flat() { return Prior(); }
    static Prior gaussian(Eigen::VectorXd mean, SpdMatrix cov) {
        if (mean.size() != cov.dim())
            throw DimensionError("prior mean and covariance disagree");
        Prior p;
        p.gaussian_.emplace(std::move(mean), std::move(cov));
        return p;
    }

    bool is_flat() const { return !gaussian_.has_value(); }
    const Eigen::VectorXd& mean() const { return gaussian_->mean(); }
    const SpdMatrix& cov() const { return gaussian_->cov(); }

private:
    Prior() = default;
    std::optional<GaussianPosterior> gaussian_;
};

// Known covariance of the per-period return noise.
class NoiseModel {
public:
    explicit NoiseModel(SpdMatrix omega) : omega_(std::move(omega)) {}

    const SpdMatrix& omega() const { return omega_; }
    Eigen::Index dim() const { return omega_.dim(); }

private:
    SpdMatrix omega_;
};

// Which columns the posterior conditions on: the training block alone, or
// training plus testing. The out-of-sample block is never conditioned on.
enum class Horizon { train_only, full };

// Gaussian posterior of the mean parameter given the observed entries up to
// the horizon. Accumulates, per column t, the observed-block precision
// scattered back to n x n and the matching weighted-observation vector, adds
// the prior terms when the prior is Gaussian, then performs one SPD solve:
//
//   precision = [prior] + sum_t embed(Omega_{X_t}^{-1})
//   mean      = precision^{-1} ([prior] + sum_t embed(Omega_{X_t}^{-1} X_t))
//
// Per-column terms are accumulated in fixed column order. Inverses of
// Omega_{X_t} are memoized by observed index set, with a dedicated fast path
// for fully observed columns. A flat prior requires every asset to be
// observed at least once within the horizon; otherwise the precision is
// singular and a CoverageError is raised.
GaussianPosterior compute_posterior(const ReturnsPanel& panel,
                                    const MissingMask& mask,
                                    const NoiseModel& noise, const Prior& prior,
                                    Horizon horizon);

// Diagnostic: is cov1 - cov2 positive semidefinite (to a relative
// tolerance)? Holds by construction for flat-prior posteriors of nested
// horizons, where the wider horizon only adds precision.
struct NestednessVerdict {
    bool nested = false;
    double min_eigenvalue = 0.0;
};

NestednessVerdict nestedness_check(const GaussianPosterior& p1,
                                   const GaussianPosterior& p2,
                                   double tol = 1e-9);

} // namespace bvmi
