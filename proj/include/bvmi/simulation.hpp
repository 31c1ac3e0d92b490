#pragma once

#include <cstdint>

#include "bvmi/panel.hpp"
#include "bvmi/sampling.hpp"

namespace bvmi {

// Missingness mechanism applied to the training block of a panel.
struct MaskSpec {
    enum class Mechanism {
        mcar,     // each training entry masked independently with prob. p
        block,    // the first floor(fraction * t_train) columns masked whole
        by_value, // training entries with |value| > threshold masked
    };

    Mechanism mechanism = Mechanism::mcar;
    double probability = 0.0;
    double fraction = 0.0;
    double threshold = 0.0;

    static MaskSpec mcar(double p);
    static MaskSpec block(double fraction);
    static MaskSpec by_value(double threshold);
};

// Generates a mask for the panel's training block. block and by_value are
// deterministic (the seed is unused); mcar consumes one Bernoulli draw per
// training entry in column-major order. The result is validated: if some
// asset ends up with no observed training entry, a CoverageError is raised
// (mcar callers may retry with a fresh substream). block with fraction = 1
// can never validate and is rejected upfront.
MissingMask generate_mask(const ReturnsPanel& panel, const MaskSpec& spec,
                          std::uint64_t seed);

// One-factor return model: asset i has mean risk_premium * beta_i + alpha_i
// and the covariance is beta beta^T + I. Defaults follow the standard
// calibration: beta = 1, alpha equi-spaced on [-0.3, 0.3].
class FactorModelSpec {
public:
    explicit FactorModelSpec(int n);
    FactorModelSpec(Eigen::VectorXd beta, Eigen::VectorXd alpha,
                    double risk_premium = 0.2);

    int n() const { return static_cast<int>(beta_.size()); }
    const Eigen::VectorXd& beta() const { return beta_; }
    const Eigen::VectorXd& alpha() const { return alpha_; }
    double risk_premium() const { return risk_premium_; }

    Eigen::VectorXd theta_true() const { return risk_premium_ * beta_ + alpha_; }
    Eigen::MatrixXd omega_true() const {
        return beta_ * beta_.transpose() +
               Eigen::MatrixXd::Identity(beta_.size(), beta_.size());
    }

private:
    Eigen::VectorXd beta_;
    Eigen::VectorXd alpha_;
    double risk_premium_;
};

// i.i.d. columns from N(theta_true, omega_true), bit-reproducible for a
// fixed seed.
ReturnsPanel generate_synthetic_panel(const FactorModelSpec& spec, int t_train,
                                      int t_test, int t_oos,
                                      std::uint64_t seed);

} // namespace bvmi
