// Command-line front end: `run` executes a configured experiment sweep and
// writes the per-budget CSV; `impute` completes one user panel at a chosen
// bias budget. Exit codes: 0 success, 2 configuration problem, 3 numerical
// failure.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bvmi/experiment.hpp"
#include "bvmi/log.hpp"
#include "bvmi/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int run_command(const std::string& config_path,
                const std::optional<std::string>& out,
                const std::optional<std::uint64_t>& seed,
                const std::optional<int>& threads) {
    bvmi::ExperimentConfig config =
        bvmi::ExperimentConfig::from_file(config_path);
    if (out) config.output_path = *out;
    if (seed) config.seed = *seed;
    if (threads) config.threads = *threads;

    const bvmi::ExperimentReport report = bvmi::run_experiment(config);
    if (config.output_path.empty()) std::cout << report.to_csv();
    bvmi::log::info("completed ", report.repetitions_completed,
                    " repetition(s), aborted ", report.repetitions_aborted);
    return kExitOk;
}

int impute_command(const std::string& config_path, double delta, int m,
                   const std::optional<std::string>& out,
                   const std::optional<std::uint64_t>& seed) {
    bvmi::ImputeRequest request = bvmi::ImputeRequest::from_file(config_path);
    request.delta = delta;
    request.imputations = m;
    if (out) request.output_prefix = *out;
    if (seed) request.seed = *seed;

    const std::vector<std::string> written = bvmi::impute_once(request);
    for (const std::string& path : written) std::cout << path << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bias-variance targeted multiple imputation of return panels"};
    app.set_version_flag("--version", std::string("bvmi ") + bvmi::kVersion);
    app.require_subcommand(0, 1);

    std::string run_config;
    std::optional<std::string> run_out;
    std::optional<std::uint64_t> run_seed;
    std::optional<int> run_threads;
    CLI::App* run = app.add_subcommand(
        "run", "run a configured experiment sweep and emit its CSV");
    run->add_option("--config", run_config, "experiment config (JSON)")
        ->required();
    run->add_option("--out", run_out, "output CSV path (overrides config)");
    run->add_option("--seed", run_seed, "master seed (overrides config)");
    run->add_option("--threads", run_threads,
                    "repetition-level worker threads (overrides config)");

    std::string impute_config;
    double impute_delta = 0.0;
    int impute_m = 0;
    std::optional<std::string> impute_out;
    std::optional<std::uint64_t> impute_seed;
    CLI::App* imp = app.add_subcommand(
        "impute", "multiply-impute one panel file at a bias budget");
    imp->add_option("--config", impute_config, "impute config (JSON)")
        ->required();
    imp->add_option("--delta", impute_delta, "bias budget")->required();
    imp->add_option("--m", impute_m, "number of imputations")->required();
    imp->add_option("--out", impute_out, "output prefix (overrides config)");
    imp->add_option("--seed", impute_seed, "seed (overrides config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run->parsed())
            return run_command(run_config, run_out, run_seed, run_threads);
        if (imp->parsed())
            return impute_command(impute_config, impute_delta, impute_m,
                                  impute_out, impute_seed);
        std::cout << app.help();
        return kExitOk;
    } catch (const bvmi::ConfigError& e) {
        bvmi::log::error(e.what());
        return kExitConfig;
    } catch (const bvmi::IngestError& e) {
        bvmi::log::error(e.what());
        return kExitConfig;
    } catch (const bvmi::CoverageError& e) {
        std::string rows;
        for (int r : e.offending_rows())
            rows += (rows.empty() ? "" : ", ") + std::to_string(r);
        bvmi::log::error(e.what(), " (offending rows: ", rows, ")");
        return kExitNumerical;
    } catch (const bvmi::Error& e) {
        bvmi::log::error(e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        bvmi::log::error("unexpected failure: ", e.what());
        return kExitNumerical;
    }
}
