#include <doctest.h>

#include <cmath>

#include "bvmi/simulation.hpp"
#include "support/helpers.hpp"

using namespace bvmi;

TEST_CASE("mask spec validation") {
    CHECK_THROWS_AS(MaskSpec::mcar(1.5), ArgumentError);
    CHECK_THROWS_AS(MaskSpec::block(-0.1), ArgumentError);
    CHECK_THROWS_AS(MaskSpec::by_value(0.0), ArgumentError);
}

TEST_CASE("mcar with p = 0 masks nothing") {
    const ReturnsPanel panel(Eigen::MatrixXd::Zero(3, 6), 4, 1, 1);
    const MissingMask mask = generate_mask(panel, MaskSpec::mcar(0.0), 1);
    CHECK_FALSE(mask.any_missing());
}

TEST_CASE("block mask covers the leading training columns exactly") {
    const ReturnsPanel panel(Eigen::MatrixXd::Zero(2, 120), 100, 10, 10);
    const MissingMask mask = generate_mask(panel, MaskSpec::block(0.6), 7);
    for (int t = 0; t < 60; ++t) CHECK(mask.column(t).all());
    for (int t = 60; t < 120; ++t) CHECK_FALSE(mask.column(t).any());
    // Deterministic: the seed does not matter.
    const MissingMask other = generate_mask(panel, MaskSpec::block(0.6), 999);
    CHECK((mask.mask() == other.mask()).all());
}

TEST_CASE("block fraction 1 is rejected upfront") {
    const ReturnsPanel panel(Eigen::MatrixXd::Zero(2, 6), 4, 1, 1);
    try {
        generate_mask(panel, MaskSpec::block(1.0), 3);
        FAIL("expected CoverageError");
    } catch (const CoverageError& e) {
        CHECK(e.offending_rows().size() == 2);
    }
}

TEST_CASE("by_value thresholds the training block only") {
    Eigen::MatrixXd values(2, 3);
    values << 0.3, -0.1, 0.9, 0.2, -0.26, -0.9;
    const ReturnsPanel panel(values, 2, 1, 0);
    const MissingMask mask =
        generate_mask(panel, MaskSpec::by_value(0.25), 11);
    CHECK(mask.mask()(0, 0));
    CHECK_FALSE(mask.mask()(0, 1));
    CHECK_FALSE(mask.mask()(1, 0));
    CHECK(mask.mask()(1, 1));
    // Values beyond the training block are ignored even though |0.9| > 0.25.
    CHECK_FALSE(mask.mask()(0, 2));
    CHECK_FALSE(mask.mask()(1, 2));
}

TEST_CASE("mcar empirical rate is near p") {
    const int n = 40;
    const int t_train = 50;
    const ReturnsPanel panel(Eigen::MatrixXd::Zero(n, t_train + 2), t_train, 1,
                             1);
    const double p = 0.35;
    const MissingMask mask = generate_mask(panel, MaskSpec::mcar(p), 5);
    const double rate =
        static_cast<double>(mask.missing_count()) / (n * t_train);
    const double tol = 3.0 * std::sqrt(p * (1 - p) / (n * t_train));
    CHECK(std::abs(rate - p) <= tol);
}

TEST_CASE("mcar coverage violations raise with the offending rows") {
    // p extremely close to 1 virtually guarantees a fully masked row.
    const ReturnsPanel panel(Eigen::MatrixXd::Zero(4, 3), 2, 1, 0);
    bool raised = false;
    for (std::uint64_t seed = 0; seed < 50 && !raised; ++seed) {
        try {
            generate_mask(panel, MaskSpec::mcar(0.999), seed);
        } catch (const CoverageError& e) {
            raised = true;
            CHECK_FALSE(e.offending_rows().empty());
        }
    }
    CHECK(raised);
}

TEST_CASE("factor model defaults match the standard calibration") {
    const FactorModelSpec spec(100);
    const Eigen::VectorXd theta = spec.theta_true();
    CHECK(theta[0] == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(theta[99] == doctest::Approx(0.5).epsilon(1e-12));
    // Equi-spaced increments.
    for (int i = 1; i < 100; ++i)
        CHECK(theta[i] - theta[i - 1] ==
              doctest::Approx(0.6 / 99.0).epsilon(1e-9));
    const Eigen::MatrixXd omega = spec.omega_true();
    CHECK(omega(0, 0) == doctest::Approx(2.0));
    CHECK(omega(3, 7) == doctest::Approx(1.0));
}

TEST_CASE("degenerate factor model reduces to unit noise") {
    const FactorModelSpec spec(Eigen::VectorXd::Zero(1),
                               Eigen::VectorXd::Zero(1));
    CHECK(spec.theta_true()[0] == 0.0);
    CHECK(spec.omega_true()(0, 0) == doctest::Approx(1.0));
    const ReturnsPanel panel = generate_synthetic_panel(spec, 200, 0, 0, 21);
    double mean = panel.values().row(0).mean();
    double var = (panel.values().row(0).array() - mean).square().mean();
    CHECK(std::abs(mean) < 0.25);
    CHECK(std::abs(var - 1.0) < 0.3);
}

TEST_CASE("synthetic panels are bit-reproducible and consistent in the mean") {
    const FactorModelSpec spec(3);
    const ReturnsPanel a = generate_synthetic_panel(spec, 4, 2, 2, 33);
    const ReturnsPanel b = generate_synthetic_panel(spec, 4, 2, 2, 33);
    CHECK(a.values() == b.values());
    const ReturnsPanel c = generate_synthetic_panel(spec, 4, 2, 2, 34);
    CHECK(a.values() != c.values());

    // Long-run column mean approaches theta_true (variance 2 per asset).
    const int t = 100000;
    const ReturnsPanel big = generate_synthetic_panel(spec, t, 0, 0, 7);
    const Eigen::VectorXd sample_mean = big.values().rowwise().mean();
    const Eigen::VectorXd theta = spec.theta_true();
    for (int i = 0; i < 3; ++i) CHECK(std::abs(sample_mean[i] - theta[i]) < 0.02);
}
