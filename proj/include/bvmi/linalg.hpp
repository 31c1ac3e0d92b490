#pragma once

#include <Eigen/Dense>

#include "bvmi/errors.hpp"

namespace bvmi {

// Dense symmetric positive-definite matrix. The input is symmetrized as
// (S + S^T)/2 after a relative symmetry check, and all eigenvalues must be
// strictly positive; both are verified at construction so downstream code
// can rely on SPD-ness without re-checking.
class SpdMatrix {
public:
    static constexpr double kSymmetryTol = 1e-9;

    explicit SpdMatrix(Eigen::MatrixXd m, double sym_tol = kSymmetryTol);

    const Eigen::MatrixXd& matrix() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }
    double trace() const { return m_.trace(); }

    static SpdMatrix identity(Eigen::Index n) {
        return SpdMatrix(Eigen::MatrixXd::Identity(n, n));
    }

private:
    Eigen::MatrixXd m_;
};

// Symmetric square root via symmetric eigendecomposition. Eigenvalues are
// clamped from below at clamp_scale * lambda_max to absorb round-off in
// nearly singular inputs; an eigenvalue below -clamp_scale * lambda_max is a
// genuine PSD violation and raises NotSpdError. Residual ||R*R - S||_F is
// at the level of machine precision relative to ||S||.
Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& s, double clamp_scale = 1e-12);

// Inverse square root, same eigendecomposition route: R * S * R == I.
Eigen::MatrixXd spd_inv_sqrt(const Eigen::MatrixXd& s,
                             double clamp_scale = 1e-12);

inline SpdMatrix spd_sqrt(const SpdMatrix& s) {
    return SpdMatrix(spd_sqrt(s.matrix()));
}

inline SpdMatrix spd_inv_sqrt(const SpdMatrix& s) {
    return SpdMatrix(spd_inv_sqrt(s.matrix()));
}

// Squared 2-Wasserstein distance between Gaussians:
//   ||m1 - m2||^2 + Tr(S1 + S2 - 2 (S2^{1/2} S1 S2^{1/2})^{1/2}).
// Clamped at zero against round-off; symmetric in its arguments.
double gaussian_w2_squared(const Eigen::VectorXd& mean1, const SpdMatrix& cov1,
                           const Eigen::VectorXd& mean2, const SpdMatrix& cov2);

} // namespace bvmi
