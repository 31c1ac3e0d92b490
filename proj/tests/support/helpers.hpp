#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "bvmi/linalg.hpp"
#include "bvmi/posterior.hpp"
#include "bvmi/rng.hpp"

namespace bvmi::test {

// Random SPD matrix with eigenvalues uniform on [lo, hi]: Q diag(v) Q^T for
// a random orthogonal Q.
inline Eigen::MatrixXd random_spd(Rng& rng, int dim, double lo = 0.3,
                                  double hi = 3.0) {
    Eigen::MatrixXd gauss(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) gauss(i, j) = rng.normal();
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
    const Eigen::MatrixXd q = qr.householderQ();
    Eigen::VectorXd eigs(dim);
    for (int i = 0; i < dim; ++i) eigs[i] = lo + (hi - lo) * rng.uniform01();
    Eigen::MatrixXd s = q * eigs.asDiagonal() * q.transpose();
    return 0.5 * (s + s.transpose());
}

inline Eigen::VectorXd random_vector(Rng& rng, int dim, double scale = 1.0) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = scale * rng.normal();
    return v;
}

inline GaussianPosterior random_gaussian(Rng& rng, int dim, double mean_scale = 1.0,
                                         double lo = 0.3, double hi = 3.0) {
    return GaussianPosterior(random_vector(rng, dim, mean_scale),
                             SpdMatrix(random_spd(rng, dim, lo, hi)));
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

// Spearman rank correlation with average ranks for ties.
inline double spearman(const std::vector<double>& x,
                       const std::vector<double>& y) {
    const std::size_t n = x.size();
    const auto ranks = [n](const std::vector<double>& v) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> rank(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
            for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
            i = j + 1;
        }
        return rank;
    };
    const std::vector<double> rx = ranks(x);
    const std::vector<double> ry = ranks(y);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

} // namespace bvmi::test
