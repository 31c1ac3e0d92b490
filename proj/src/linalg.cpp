#include "bvmi/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace bvmi {

namespace {

// Eigendecomposition of the symmetrized input with a PSD check. Returns
// eigenvalues clamped from below at clamp_scale * lambda_max.
struct SymEig {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

SymEig clamped_eig(const Eigen::MatrixXd& s, double clamp_scale) {
    if (s.rows() != s.cols())
        throw DimensionError("matrix is not square");
    const Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    if (eig.info() != Eigen::Success)
        throw NotSpdError("symmetric eigendecomposition failed");
    Eigen::VectorXd vals = eig.eigenvalues();
    const double max_eig = vals.size() > 0 ? vals.maxCoeff() : 0.0;
    if (max_eig <= 0.0)
        throw NotSpdError("matrix has no positive eigenvalue");
    const double clamp = clamp_scale * max_eig;
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
        if (vals[i] < -clamp) {
            std::ostringstream os;
            os << "matrix is not positive semidefinite: eigenvalue "
               << vals[i] << " below -" << clamp;
            throw NotSpdError(os.str());
        }
        vals[i] = std::max(vals[i], clamp);
    }
    return SymEig{std::move(vals), eig.eigenvectors()};
}

} // namespace

SpdMatrix::SpdMatrix(Eigen::MatrixXd m, double sym_tol) : m_(std::move(m)) {
    if (m_.rows() != m_.cols())
        throw DimensionError("SPD matrix must be square");
    if (m_.size() == 0)
        throw DimensionError("SPD matrix must be non-empty");
    if (!m_.allFinite())
        throw NotSpdError("SPD matrix has non-finite entries");
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
    if (asym > sym_tol * scale) {
        std::ostringstream os;
        os << "matrix is not symmetric: max|S - S^T| = " << asym
           << " exceeds " << sym_tol * scale;
        throw NotSpdError(os.str());
    }
    m_ = 0.5 * (m_ + m_.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m_,
                                                       Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success)
        throw NotSpdError("eigenvalue check failed");
    const double min_eig = eig.eigenvalues().minCoeff();
    if (min_eig <= 0.0) {
        std::ostringstream os;
        os << "matrix is not positive definite: min eigenvalue = " << min_eig;
        throw NotSpdError(os.str());
    }
}

Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& s, double clamp_scale) {
    const SymEig eig = clamped_eig(s, clamp_scale);
    const Eigen::VectorXd roots = eig.values.cwiseSqrt();
    return eig.vectors * roots.asDiagonal() * eig.vectors.transpose();
}

Eigen::MatrixXd spd_inv_sqrt(const Eigen::MatrixXd& s, double clamp_scale) {
    const SymEig eig = clamped_eig(s, clamp_scale);
    const Eigen::VectorXd inv_roots = eig.values.cwiseSqrt().cwiseInverse();
    return eig.vectors * inv_roots.asDiagonal() * eig.vectors.transpose();
}

double gaussian_w2_squared(const Eigen::VectorXd& mean1, const SpdMatrix& cov1,
                           const Eigen::VectorXd& mean2,
                           const SpdMatrix& cov2) {
    if (mean1.size() != mean2.size() || cov1.dim() != cov2.dim() ||
        mean1.size() != cov1.dim())
        throw DimensionError("gaussian_w2_squared: dimension mismatch");
    const Eigen::MatrixXd root2 = spd_sqrt(cov2.matrix());
    const Eigen::MatrixXd inner = root2 * cov1.matrix() * root2;
    // Tr((S2^{1/2} S1 S2^{1/2})^{1/2}) from eigenvalues alone.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        0.5 * (inner + inner.transpose()), Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success)
        throw NotSpdError("eigenvalue computation failed");
    double trace_root = 0.0;
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i)
        trace_root += std::sqrt(std::max(eig.eigenvalues()[i], 0.0));
    const double value = (mean1 - mean2).squaredNorm() + cov1.trace() +
                         cov2.trace() - 2.0 * trace_root;
    return std::max(value, 0.0);
}

} // namespace bvmi
