#include "bvmi/simulation.hpp"

#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

namespace bvmi {

MaskSpec MaskSpec::mcar(double p) {
    if (p < 0.0 || p > 1.0)
        throw ArgumentError("mcar probability must lie in [0, 1]");
    MaskSpec spec;
    spec.mechanism = Mechanism::mcar;
    spec.probability = p;
    return spec;
}

MaskSpec MaskSpec::block(double fraction) {
    if (fraction < 0.0 || fraction > 1.0)
        throw ArgumentError("block fraction must lie in [0, 1]");
    MaskSpec spec;
    spec.mechanism = Mechanism::block;
    spec.fraction = fraction;
    return spec;
}

MaskSpec MaskSpec::by_value(double threshold) {
    if (!(threshold > 0.0))
        throw ArgumentError("by_value threshold must be positive");
    MaskSpec spec;
    spec.mechanism = Mechanism::by_value;
    spec.threshold = threshold;
    return spec;
}

MissingMask generate_mask(const ReturnsPanel& panel, const MaskSpec& spec,
                          std::uint64_t seed) {
    const int n = panel.n_assets();
    const int t_train = panel.t_train();
    BoolArray mask = BoolArray::Constant(n, panel.t_total(), false);

    switch (spec.mechanism) {
        case MaskSpec::Mechanism::mcar: {
            Rng rng(seed);
            for (int t = 0; t < t_train; ++t)
                for (int i = 0; i < n; ++i)
                    mask(i, t) = rng.bernoulli(spec.probability);
            break;
        }
        case MaskSpec::Mechanism::block: {
            if (spec.fraction >= 1.0) {
                std::vector<int> all_rows(static_cast<std::size_t>(n));
                for (int i = 0; i < n; ++i) all_rows[static_cast<std::size_t>(i)] = i;
                throw CoverageError(
                    "block fraction 1 masks the whole training period", all_rows);
            }
            const int masked_cols =
                static_cast<int>(std::floor(spec.fraction * t_train));
            for (int t = 0; t < masked_cols; ++t) mask.col(t).setConstant(true);
            break;
        }
        case MaskSpec::Mechanism::by_value: {
            for (int t = 0; t < t_train; ++t)
                for (int i = 0; i < n; ++i)
                    mask(i, t) = std::abs(panel.values()(i, t)) > spec.threshold;
            break;
        }
    }

    MissingMask result(std::move(mask), t_train);
    const std::vector<int> uncovered = validate_coverage(panel, result);
    if (!uncovered.empty()) {
        std::ostringstream os;
        os << "generated mask leaves " << uncovered.size()
           << " asset(s) with no observed training entry";
        throw CoverageError(os.str(), uncovered);
    }
    return result;
}

FactorModelSpec::FactorModelSpec(int n) : risk_premium_(0.2) {
    if (n < 1) throw ArgumentError("factor model needs n >= 1");
    beta_ = Eigen::VectorXd::Ones(n);
    alpha_ = Eigen::VectorXd::LinSpaced(n, -0.3, 0.3);
}

FactorModelSpec::FactorModelSpec(Eigen::VectorXd beta, Eigen::VectorXd alpha,
                                 double risk_premium)
    : beta_(std::move(beta)), alpha_(std::move(alpha)),
      risk_premium_(risk_premium) {
    if (beta_.size() < 1 || beta_.size() != alpha_.size())
        throw DimensionError("beta and alpha must be non-empty and equal-length");
}

ReturnsPanel generate_synthetic_panel(const FactorModelSpec& spec, int t_train,
                                      int t_test, int t_oos,
                                      std::uint64_t seed) {
    if (t_train < 1 || t_test < 0 || t_oos < 0)
        throw ArgumentError("panel lengths must be positive");
    const int t_total = t_train + t_test + t_oos;
    const GaussianSampler sampler(spec.theta_true(), spec.omega_true());
    Rng rng(seed);
    Eigen::MatrixXd values(spec.n(), t_total);
    for (int t = 0; t < t_total; ++t) values.col(t) = sampler.draw(rng);
    return ReturnsPanel(std::move(values), t_train, t_test, t_oos);
}

} // namespace bvmi
