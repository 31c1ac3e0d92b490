#include <doctest.h>

#include <cmath>

#include "bvmi/evaluation.hpp"
#include "support/helpers.hpp"

using namespace bvmi;

namespace {

ImputedPanel plain_imputed(const Eigen::MatrixXd& values, int t_train,
                           int t_test, int t_oos) {
    MissingMask mask(BoolArray::Constant(values.rows(), values.cols(), false),
                     t_train);
    return ImputedPanel(values, std::move(mask),
                        Eigen::VectorXd::Zero(values.rows()), t_train, t_test,
                        t_oos);
}

} // namespace

TEST_CASE("weights are the normalized training sum") {
    Eigen::MatrixXd values(2, 4);
    values << 3, 3, 1, 9, 4, 4, 1, 9; // two equal training columns (3,4)
    const ImputedPanel imputed = plain_imputed(values, 2, 1, 1);
    const Eigen::VectorXd w = portfolio_weights(imputed);
    CHECK(w[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(w[1] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(w.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("single positive asset gets weight one") {
    Eigen::MatrixXd values(1, 3);
    values << 2, 1, 1;
    const Eigen::VectorXd w = portfolio_weights(plain_imputed(values, 1, 1, 1));
    CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero training sum yields the degenerate zero vector") {
    Eigen::MatrixXd values(2, 3);
    values << 1, -1, 5, 2, -2, 5; // training columns cancel
    const ImputedPanel imputed = plain_imputed(values, 2, 1, 0);
    CHECK(portfolio_weights(imputed).isZero(0.0));
}

TEST_CASE("regret compares test and out-of-sample blocks on true returns") {
    SUBCASE("identical blocks cancel") {
        Eigen::MatrixXd values(2, 3);
        values << 1, 2, 2, 1, 3, 3;
        const ImputedPanel imputed = plain_imputed(values, 1, 1, 1);
        const ReturnsPanel truth(values, 1, 1, 1);
        const PortfolioResult result = portfolio_regret(imputed, truth);
        CHECK(result.regret == doctest::Approx(0.0).epsilon(1e-15));
    }

    SUBCASE("equal block averages cancel") {
        Eigen::MatrixXd values(1, 4);
        values << 5, 1, 3, 2; // test {1,3} averages to 2, oos {2}
        const ImputedPanel imputed = plain_imputed(values, 1, 2, 1);
        const ReturnsPanel truth(values, 1, 2, 1);
        const PortfolioResult result = portfolio_regret(imputed, truth);
        CHECK(result.test_return == doctest::Approx(2.0));
        CHECK(result.oos_return == doctest::Approx(2.0));
        CHECK(result.regret == doctest::Approx(0.0));
    }

    SUBCASE("inner product arithmetic") {
        Eigen::MatrixXd values(2, 3);
        values << 3, 1, 0, 4, 1, 0; // w = (0.6, 0.8), test (1,1), oos (0,0)
        const ImputedPanel imputed = plain_imputed(values, 1, 1, 1);
        const ReturnsPanel truth(values, 1, 1, 1);
        const PortfolioResult result = portfolio_regret(imputed, truth);
        CHECK(result.test_return == doctest::Approx(1.4).epsilon(1e-12));
        CHECK(result.regret == doctest::Approx(1.4).epsilon(1e-12));
        CHECK(result.regret == result.test_return - result.oos_return);
    }

    SUBCASE("missing test or oos block is an error") {
        Eigen::MatrixXd values(1, 2);
        values << 1, 2;
        const ImputedPanel imputed = plain_imputed(values, 1, 1, 0);
        const ReturnsPanel truth(values, 1, 1, 0);
        CHECK_THROWS_AS(portfolio_regret(imputed, truth), ArgumentError);
    }
}

TEST_CASE("weights are invariant to positive scaling of the training block") {
    Rng rng(47);
    Eigen::MatrixXd values(3, 6);
    for (int i = 0; i < 3; ++i)
        for (int t = 0; t < 6; ++t) values(i, t) = rng.normal();
    const ReturnsPanel truth(values, 3, 2, 1);

    Eigen::MatrixXd scaled = values;
    scaled.leftCols(3) *= 5.0;
    const PortfolioResult base =
        portfolio_regret(plain_imputed(values, 3, 2, 1), truth);
    const PortfolioResult big =
        portfolio_regret(plain_imputed(scaled, 3, 2, 1), truth);
    CHECK((base.weights - big.weights).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(base.regret == doctest::Approx(big.regret).epsilon(1e-12));
}

TEST_CASE("ecmse hand-computed example") {
    const EcmseRow row = ecmse({{0.1, 0.3}});
    CHECK(row.ec_bias_sq == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(row.ec_var == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(row.ec_mse == doctest::Approx(0.06).epsilon(1e-12));
    CHECK(row.ec_mse == row.ec_bias_sq + row.ec_var);
    CHECK(row.repetitions == 1);
    CHECK(row.imputations == 2);
}

TEST_CASE("one-sided bias clamps negative means to zero") {
    const EcmseRow row = ecmse({{-0.5, -0.5}, {-0.5, -0.5}});
    CHECK(row.ec_bias_sq == 0.0);
    CHECK(row.ec_var == 0.0);
    CHECK(row.ec_mse == 0.0);
}

TEST_CASE("constant positive regret is pure bias") {
    const double c = 0.3;
    const EcmseRow row = ecmse({{c, c, c}, {c, c, c}});
    CHECK(row.ec_bias_sq == doctest::Approx(c * c).epsilon(1e-12));
    CHECK(row.ec_var == 0.0);
    CHECK(row.ec_mse == doctest::Approx(c * c).epsilon(1e-12));
}

TEST_CASE("ecmse argument validation") {
    CHECK_THROWS_AS(ecmse({}), ArgumentError);
    CHECK_THROWS_AS(ecmse({{0.1}}), ArgumentError);
    CHECK_THROWS_AS(ecmse({{0.1, 0.2}, {0.3}}), ArgumentError);
}

TEST_CASE("property: ecmse is invariant to permuting imputations within a "
          "repetition") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<double>> regrets(3);
        for (auto& rep : regrets)
            for (int i = 0; i < 5; ++i) rep.push_back(rng.normal());
        const EcmseRow base = ecmse(regrets);
        for (auto& rep : regrets) std::reverse(rep.begin(), rep.end());
        const EcmseRow permuted = ecmse(regrets);
        CHECK(base.ec_bias_sq ==
              doctest::Approx(permuted.ec_bias_sq).epsilon(1e-12));
        CHECK(base.ec_var == doctest::Approx(permuted.ec_var).epsilon(1e-12));
    }
}

TEST_CASE("per-repetition audit fields are retained") {
    const EcmseRow row = ecmse({{0.1, 0.3}, {0.2, 0.4}});
    REQUIRE(row.rep_means.size() == 2);
    REQUIRE(row.rep_vars.size() == 2);
    CHECK(row.rep_means[0] == doctest::Approx(0.2));
    CHECK(row.rep_means[1] == doctest::Approx(0.3));
    CHECK(row.rep_vars[0] == doctest::Approx(0.02));
}
