#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bvmi/consensus.hpp"
#include "bvmi/evaluation.hpp"
#include "bvmi/imputer.hpp"
#include "bvmi/ingest.hpp"
#include "bvmi/simulation.hpp"

namespace bvmi {

// Prior specification with the dimension left open until the asset count is
// known; scalars broadcast to n.
struct PriorSpec {
    bool flat = true;
    std::optional<double> mean_scalar;
    std::optional<Eigen::VectorXd> mean_vector;
    std::optional<double> cov_scale;        // covariance = cov_scale * I
    std::optional<Eigen::MatrixXd> cov_matrix;

    Prior materialize(int n) const;
};

// Fresh factor-model draw per repetition.
struct SyntheticSource {
    int n = 0;
    PanelSplits splits;
    std::optional<Eigen::VectorXd> beta;
    std::optional<Eigen::VectorXd> alpha;
    double risk_premium = 0.2;

    FactorModelSpec model() const;
};

// Windows of a delimited file. With rolling windows, repetition k starts at
// start_offset + k; otherwise every repetition reuses the same window.
// The noise covariance is fitted once over the whole source file unless
// fit_covariance_on_window restricts it to each window's train+test block.
struct FileSource {
    std::string path;
    PanelFileSchema schema;
    PanelSplits splits;
    std::optional<bool> rolling; // default: true except under mcar masking
    int start_offset = 0;
    bool fit_covariance_on_window = false;
    std::optional<double> ridge;
};

struct ExperimentConfig {
    std::variant<SyntheticSource, FileSource> source;
    MaskSpec mask;
    PriorSpec prior;
    int delta_grid_size = 10;
    int repetitions = 1;
    int imputations = 2;
    std::uint64_t seed = 0;
    ImputationMode mode = ImputationMode::conditional_expectation;
    int threads = 1;
    std::string output_path;

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);

    void validate() const;
    bool rolling_windows() const;
};

// Aggregate over repetitions at one grid position. Every repetition has its
// own delta grid (delta_max depends on its posteriors); positions align
// across repetitions through the shared ratio delta / delta_max.
struct DeltaRow {
    double delta = 0.0;                // mean per-repetition budget
    double delta_over_delta_max = 0.0; // exact grid ratio
    double lambda2 = 0.0;              // mean optimal weight on the full-data posterior
    double mean_delta_max = 0.0;       // diagnostic, not part of the CSV
    EcmseRow stats;
};

struct ExperimentReport {
    std::vector<DeltaRow> rows;
    int repetitions_completed = 0;
    int repetitions_aborted = 0;
    int imputations = 0;
    std::uint64_t seed = 0;

    // Byte-stable rendering: one header plus one row per grid position with
    // columns delta, delta_over_delta_max, lambda2_star, ec_bias_sq, ec_var,
    // ec_mse, K, M, seed.
    std::string to_csv() const;
};

// Runs the full repetition loop: draw or window a panel, generate a mask
// (mcar retries on coverage failures, at most 100 substreams), compute the
// training-only and full-horizon posteriors, sweep the delta grid, impute M
// times per budget and aggregate regret statistics. Repetitions that fail
// with a library error are logged and skipped; more than 20% aborted fails
// the run. Writes the CSV to output_path when set. The result is a pure
// function of (config, seed) regardless of the thread count.
ExperimentReport run_experiment(const ExperimentConfig& config);

// Library-as-tool entry point: impute a user panel (missing cells marked
// NA) at one bias budget and write each completed panel next to the input.
struct ImputeRequest {
    std::string input_path;
    PanelFileSchema schema;
    PanelSplits splits;
    int start_offset = 0;
    PriorSpec prior;
    std::optional<double> ridge;
    double delta = 0.0;
    int imputations = 1;
    std::uint64_t seed = 0;
    ImputationMode mode = ImputationMode::conditional_expectation;
    std::string output_prefix = "imputed";

    static ImputeRequest from_json_text(const std::string& text);
    static ImputeRequest from_file(const std::string& path);
};

// Returns the paths written, one per imputation.
std::vector<std::string> impute_once(const ImputeRequest& request);

} // namespace bvmi
