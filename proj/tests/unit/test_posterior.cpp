#include <doctest.h>

#include <cmath>

#include "bvmi/posterior.hpp"
#include "support/grid_bayes.hpp"
#include "support/helpers.hpp"

using namespace bvmi;

namespace {

NoiseModel noise_from(std::initializer_list<std::initializer_list<double>> rows) {
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd omega(n, n);
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        Eigen::Index j = 0;
        for (double v : row) omega(i, j++) = v;
        ++i;
    }
    return NoiseModel(SpdMatrix(omega));
}

MissingMask no_mask(int n, int t_total, int t_train) {
    return MissingMask(BoolArray::Constant(n, t_total, false), t_train);
}

} // namespace

TEST_CASE("scalar flat-prior posterior is the sample mean with variance "
          "omega/T") {
    Eigen::MatrixXd values(1, 2);
    values << 1, 3;
    const ReturnsPanel panel(values, 2, 0, 0);
    const GaussianPosterior post =
        compute_posterior(panel, no_mask(1, 2, 2), noise_from({{4.0}}),
                          Prior::flat(), Horizon::train_only);
    CHECK(post.mean()[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(post.cov().matrix()(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("partially observed column accumulates per-entry precision") {
    Eigen::MatrixXd values(2, 2);
    values << 1, 3, 2, 0; // (1,2) fully observed, then only asset 0 with 3
    const ReturnsPanel panel(values, 2, 0, 0);
    BoolArray m = BoolArray::Constant(2, 2, false);
    m(1, 1) = true;
    const MissingMask mask(m, 2);
    const NoiseModel noise = noise_from({{1.0, 0.0}, {0.0, 1.0}});

    const GaussianPosterior post = compute_posterior(
        panel, mask, noise, Prior::flat(), Horizon::train_only);
    CHECK(post.mean()[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(post.mean()[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(post.cov().matrix()(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(post.cov().matrix()(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(post.cov().matrix()(0, 1)) < 1e-14);

    // Independent grid-integration oracle over [-5, 5]^2.
    const test::GridPosterior oracle = test::grid_bayes(
        panel, mask, noise.omega().matrix(), Prior::flat(), 2,
        Eigen::VectorXd::Zero(2), Eigen::VectorXd::Constant(2, 5.0));
    CHECK((oracle.mean - post.mean()).cwiseAbs().maxCoeff() < 1e-2);
    CHECK(test::max_abs_diff(oracle.cov, post.cov().matrix()) < 2e-2);
}

TEST_CASE("textbook conjugate update with a gaussian prior") {
    Eigen::MatrixXd values(1, 1);
    values << 5;
    const ReturnsPanel panel(values, 1, 0, 0);
    const Prior prior =
        Prior::gaussian(Eigen::VectorXd::Zero(1), SpdMatrix::identity(1));
    const GaussianPosterior post =
        compute_posterior(panel, no_mask(1, 1, 1), noise_from({{1.0}}), prior,
                          Horizon::train_only);
    CHECK(post.mean()[0] == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(post.cov().matrix()(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("flat prior with an unobserved row raises CoverageError") {
    Eigen::MatrixXd values = Eigen::MatrixXd::Ones(2, 3);
    const ReturnsPanel panel(values, 2, 1, 0);
    BoolArray m = BoolArray::Constant(2, 3, false);
    m(0, 0) = true;
    m(0, 1) = true; // row 0 never observed while training
    const MissingMask mask(m, 2);
    const NoiseModel noise = noise_from({{1.0, 0.0}, {0.0, 1.0}});

    try {
        compute_posterior(panel, mask, noise, Prior::flat(),
                          Horizon::train_only);
        FAIL("expected CoverageError");
    } catch (const CoverageError& e) {
        CHECK(e.offending_rows() == std::vector<int>{0});
    }
    // The full horizon sees the complete testing column, so it succeeds.
    CHECK_NOTHROW(compute_posterior(panel, mask, noise, Prior::flat(),
                                    Horizon::full));
    // A gaussian prior regularizes the training-only horizon.
    const Prior prior = Prior::gaussian(Eigen::VectorXd::Zero(2),
                                        SpdMatrix::identity(2));
    CHECK_NOTHROW(
        compute_posterior(panel, mask, noise, prior, Horizon::train_only));
}

TEST_CASE("fully missing training columns contribute nothing") {
    Eigen::MatrixXd values(1, 3);
    values << 9, 1, 3; // first column fully masked
    const ReturnsPanel panel(values, 3, 0, 0);
    BoolArray m = BoolArray::Constant(1, 3, false);
    m(0, 0) = true;
    const GaussianPosterior post =
        compute_posterior(panel, MissingMask(m, 3), noise_from({{4.0}}),
                          Prior::flat(), Horizon::train_only);
    CHECK(post.mean()[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(post.cov().matrix()(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("nestedness check on explicit covariance pairs") {
    const GaussianPosterior wide(
        Eigen::VectorXd::Zero(2),
        SpdMatrix(2.0 * Eigen::MatrixXd::Identity(2, 2)));
    const GaussianPosterior narrow(Eigen::VectorXd::Zero(2),
                                   SpdMatrix::identity(2));
    CHECK(nestedness_check(wide, narrow).nested);
    CHECK_FALSE(nestedness_check(narrow, wide).nested);
}

TEST_CASE("flat-prior posteriors of nested horizons are nested") {
    Rng rng(31337);
    Eigen::MatrixXd values(3, 8);
    for (int i = 0; i < 3; ++i)
        for (int t = 0; t < 8; ++t) values(i, t) = rng.normal();
    const ReturnsPanel panel(values, 4, 4, 0);
    BoolArray m = BoolArray::Constant(3, 8, false);
    m(0, 0) = true;
    m(2, 1) = true;
    m(1, 3) = true;
    const MissingMask mask(m, 4);
    const NoiseModel noise(SpdMatrix(test::random_spd(rng, 3)));

    const GaussianPosterior p1 = compute_posterior(panel, mask, noise,
                                                   Prior::flat(),
                                                   Horizon::train_only);
    const GaussianPosterior p2 =
        compute_posterior(panel, mask, noise, Prior::flat(), Horizon::full);
    CHECK(nestedness_check(p1, p2).nested);

    // Monotone precision: the precision gained by the wider horizon equals
    // the embedded testing-column precisions and is PSD.
    const Eigen::MatrixXd gain = p2.cov().matrix().inverse() -
                                 p1.cov().matrix().inverse();
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 3);
    const Eigen::MatrixXd omega_inv = noise.omega().matrix().inverse();
    for (int t = 4; t < 8; ++t) expected += omega_inv;
    CHECK(test::max_abs_diff(gain, expected) < 1e-6);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        0.5 * (gain + gain.transpose()), Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().minCoeff() > -1e-9);
}

TEST_CASE("wide gaussian prior recovers the flat-prior posterior") {
    Rng rng(55);
    Eigen::MatrixXd values(2, 5);
    for (int i = 0; i < 2; ++i)
        for (int t = 0; t < 5; ++t) values(i, t) = rng.normal();
    const ReturnsPanel panel(values, 5, 0, 0);
    BoolArray m = BoolArray::Constant(2, 5, false);
    m(0, 1) = true;
    m(1, 4) = true;
    const MissingMask mask(m, 5);
    const NoiseModel noise(SpdMatrix(test::random_spd(rng, 2)));

    const GaussianPosterior flat = compute_posterior(
        panel, mask, noise, Prior::flat(), Horizon::train_only);
    const Prior wide = Prior::gaussian(
        Eigen::VectorXd::Zero(2),
        SpdMatrix(1e8 * Eigen::MatrixXd::Identity(2, 2)));
    const GaussianPosterior near = compute_posterior(panel, mask, noise, wide,
                                                     Horizon::train_only);
    CHECK((near.mean() - flat.mean()).cwiseAbs().maxCoeff() < 1e-4);
    const double cov_scale = flat.cov().matrix().cwiseAbs().maxCoeff();
    CHECK(test::max_abs_diff(near.cov().matrix(), flat.cov().matrix()) <
          1e-4 * cov_scale);
}

TEST_CASE("property: permuting assets permutes the posterior") {
    Rng rng(808);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 3;
        const int t = 5;
        Eigen::MatrixXd values(n, t);
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < t; ++c) values(i, c) = rng.normal();
        BoolArray m = BoolArray::Constant(n, t, false);
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < t - 1; ++c) m(i, c) = rng.bernoulli(0.3);
        const Eigen::MatrixXd omega = test::random_spd(rng, n);

        // Cyclic permutation sigma(i) = i+1 mod n as a permutation matrix.
        Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) p((i + 1) % n, i) = 1.0;

        const ReturnsPanel panel(values, t, 0, 0);
        const MissingMask mask(m, t);
        const GaussianPosterior base = compute_posterior(
            panel, mask, NoiseModel(SpdMatrix(omega)), Prior::flat(),
            Horizon::train_only);

        BoolArray pm(n, t);
        for (int i = 0; i < n; ++i) pm.row((i + 1) % n) = m.row(i);
        const ReturnsPanel permuted_panel(p * values, t, 0, 0);
        const MissingMask permuted_mask(pm, t);
        const GaussianPosterior permuted = compute_posterior(
            permuted_panel, permuted_mask,
            NoiseModel(SpdMatrix(p * omega * p.transpose())), Prior::flat(),
            Horizon::train_only);

        CHECK((permuted.mean() - p * base.mean()).cwiseAbs().maxCoeff() <=
              1e-12);
        CHECK(test::max_abs_diff(permuted.cov().matrix(),
                                 p * base.cov().matrix() * p.transpose()) <=
              1e-12);
    }
}

TEST_CASE("property: posterior matches the grid oracle on random small "
          "instances") {
    Rng rng(616);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 1 + static_cast<int>(rng.next_u64() % 2);
        const int t_k = 1 + static_cast<int>(rng.next_u64() % 3);
        Eigen::MatrixXd values(n, t_k);
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < t_k; ++c) values(i, c) = rng.normal();
        BoolArray m = BoolArray::Constant(n, t_k, false);
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < t_k; ++c) m(i, c) = rng.bernoulli(0.3);
        const bool gaussian_prior = trial % 2 == 1;
        if (!gaussian_prior)
            for (int i = 0; i < n; ++i) m(i, static_cast<int>(rng.next_u64() % t_k)) = false;

        const ReturnsPanel panel(values, t_k, 0, 0);
        const MissingMask mask(m, t_k);
        const Eigen::MatrixXd omega = test::random_spd(rng, n, 0.4, 1.5);
        const Prior prior =
            gaussian_prior
                ? Prior::gaussian(test::random_vector(rng, n, 0.5),
                                  SpdMatrix(test::random_spd(rng, n, 0.5, 2.0)))
                : Prior::flat();

        const GaussianPosterior post =
            compute_posterior(panel, mask, NoiseModel(SpdMatrix(omega)), prior,
                              Horizon::train_only);

        Eigen::VectorXd halfwidth(n);
        for (int i = 0; i < n; ++i)
            halfwidth[i] =
                5.0 * std::sqrt(post.cov().matrix()(i, i)) + 1.0;
        const test::GridPosterior oracle =
            test::grid_bayes(panel, mask, omega, prior, t_k, post.mean(),
                             halfwidth);
        CHECK((oracle.mean - post.mean()).cwiseAbs().maxCoeff() < 1e-2);
        CHECK(test::max_abs_diff(oracle.cov, post.cov().matrix()) < 2e-2);
    }
}
