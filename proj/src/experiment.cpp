#include "bvmi/experiment.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <utility>

#include <json.hpp>

#include "bvmi/log.hpp"

namespace bvmi {

namespace {

using nlohmann::json;

// Seed fan-out (part of the reproducibility contract):
//   repetition k        derive_seed(master, k)
//   panel draw          derive_seed(rep, 0)
//   mask attempt a      derive_seed(rep, 1 + a),   a < 100
//   imputations, grid g derive_seed(rep, 101 + g), then (., i) per imputation
constexpr std::uint64_t kPanelStream = 0;
constexpr std::uint64_t kMaskStreamBase = 1;
constexpr int kMaxMaskAttempts = 100;
constexpr std::uint64_t kImputeStreamBase = 101;

void check_keys(const json& obj, const char* where,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                ok = true;
                break;
            }
        if (!ok)
            throw ConfigError(std::string("unknown key '") + item.key() +
                              "' in " + where);
    }
}

Eigen::VectorXd parse_vector(const json& j, const char* what) {
    if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array");
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
}

Eigen::MatrixXd parse_matrix(const json& j, const char* what) {
    if (!j.is_array() || j.empty())
        throw ConfigError(std::string(what) + " must be a non-empty array of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].size();
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            throw ConfigError(std::string(what) + " rows have unequal lengths");
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                j[r][c].get<double>();
    }
    return m;
}

PanelSplits parse_splits(const json& j, const char* where) {
    PanelSplits splits;
    if (!j.contains("t_train") || !j.contains("t_test") || !j.contains("t_oos"))
        throw ConfigError(std::string(where) +
                          " needs t_train, t_test and t_oos");
    splits.t_train = j.at("t_train").get<int>();
    splits.t_test = j.at("t_test").get<int>();
    splits.t_oos = j.at("t_oos").get<int>();
    return splits;
}

PanelFileSchema parse_schema(const json& j) {
    check_keys(j, "data.file.schema",
               {"preset", "date_column", "asset_columns", "delimiter",
                "scale_divisor", "start_date", "end_date"});
    PanelFileSchema schema;
    if (j.contains("preset")) {
        const std::string preset = j.at("preset").get<std::string>();
        if (preset == "ken_french")
            schema = PanelFileSchema::ken_french();
        else
            throw ConfigError("unknown schema preset '" + preset + "'");
    }
    if (j.contains("date_column"))
        schema.date_column = j.at("date_column").get<std::string>();
    if (j.contains("asset_columns"))
        schema.asset_columns =
            j.at("asset_columns").get<std::vector<std::string>>();
    if (j.contains("delimiter")) {
        const std::string d = j.at("delimiter").get<std::string>();
        if (d.size() != 1) throw ConfigError("delimiter must be one character");
        schema.delimiter = d[0];
    }
    if (j.contains("scale_divisor"))
        schema.scale_divisor = j.at("scale_divisor").get<double>();
    if (j.contains("start_date")) schema.start_date = j.at("start_date").get<int>();
    if (j.contains("end_date")) schema.end_date = j.at("end_date").get<int>();
    return schema;
}

MaskSpec parse_mask(const json& j) {
    check_keys(j, "mask", {"mechanism", "p", "fraction", "threshold"});
    const std::string mechanism = j.at("mechanism").get<std::string>();
    if (mechanism == "mcar") return MaskSpec::mcar(j.at("p").get<double>());
    if (mechanism == "block")
        return MaskSpec::block(j.at("fraction").get<double>());
    if (mechanism == "by_value")
        return MaskSpec::by_value(j.at("threshold").get<double>());
    throw ConfigError("unknown mask mechanism '" + mechanism + "'");
}

PriorSpec parse_prior(const json& j) {
    check_keys(j, "prior", {"kind", "mean", "cov"});
    PriorSpec spec;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "flat") {
        spec.flat = true;
        return spec;
    }
    if (kind != "gaussian")
        throw ConfigError("prior kind must be flat or gaussian");
    spec.flat = false;
    if (j.contains("mean")) {
        if (j.at("mean").is_number())
            spec.mean_scalar = j.at("mean").get<double>();
        else
            spec.mean_vector = parse_vector(j.at("mean"), "prior.mean");
    }
    if (j.contains("cov")) {
        if (j.at("cov").is_number())
            spec.cov_scale = j.at("cov").get<double>();
        else
            spec.cov_matrix = parse_matrix(j.at("cov"), "prior.cov");
    }
    return spec;
}

ImputationMode parse_mode(const json& j) {
    const std::string mode = j.get<std::string>();
    if (mode == "conditional_expectation")
        return ImputationMode::conditional_expectation;
    if (mode == "with_noise") return ImputationMode::with_noise;
    throw ConfigError("mode must be conditional_expectation or with_noise");
}

SyntheticSource parse_synthetic(const json& j) {
    check_keys(j, "data.synthetic",
               {"n", "t_train", "t_test", "t_oos", "beta", "alpha",
                "risk_premium"});
    SyntheticSource src;
    src.n = j.at("n").get<int>();
    src.splits = parse_splits(j, "data.synthetic");
    if (j.contains("beta")) {
        if (j.at("beta").is_number())
            src.beta = Eigen::VectorXd::Constant(src.n, j.at("beta").get<double>());
        else
            src.beta = parse_vector(j.at("beta"), "data.synthetic.beta");
    }
    if (j.contains("alpha"))
        src.alpha = parse_vector(j.at("alpha"), "data.synthetic.alpha");
    if (j.contains("risk_premium"))
        src.risk_premium = j.at("risk_premium").get<double>();
    return src;
}

FileSource parse_file_source(const json& j) {
    check_keys(j, "data.file",
               {"path", "t_train", "t_test", "t_oos", "schema", "rolling",
                "start_offset", "fit_covariance_on_window", "ridge"});
    FileSource src;
    src.path = j.at("path").get<std::string>();
    src.splits = parse_splits(j, "data.file");
    if (j.contains("schema")) src.schema = parse_schema(j.at("schema"));
    if (j.contains("rolling")) src.rolling = j.at("rolling").get<bool>();
    if (j.contains("start_offset"))
        src.start_offset = j.at("start_offset").get<int>();
    if (j.contains("fit_covariance_on_window"))
        src.fit_covariance_on_window =
            j.at("fit_covariance_on_window").get<bool>();
    if (j.contains("ridge")) src.ridge = j.at("ridge").get<double>();
    return src;
}

json parse_json_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
}

json load_json_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw ConfigError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << file.rdbuf();
    return parse_json_text(buffer.str());
}

ExperimentConfig config_from_json(const json& root) {
    try {
        check_keys(root, "config",
                   {"data", "mask", "prior", "delta_grid_size", "repetitions",
                    "imputations", "seed", "mode", "threads", "output"});
        ExperimentConfig config;
        const json& data = root.at("data");
        check_keys(data, "data", {"synthetic", "file"});
        if (data.contains("synthetic") == data.contains("file"))
            throw ConfigError("data must contain exactly one of synthetic or file");
        if (data.contains("synthetic"))
            config.source = parse_synthetic(data.at("synthetic"));
        else
            config.source = parse_file_source(data.at("file"));
        config.mask = parse_mask(root.at("mask"));
        if (root.contains("prior")) config.prior = parse_prior(root.at("prior"));
        if (root.contains("delta_grid_size"))
            config.delta_grid_size = root.at("delta_grid_size").get<int>();
        config.repetitions = root.at("repetitions").get<int>();
        config.imputations = root.at("imputations").get<int>();
        if (root.contains("seed"))
            config.seed = root.at("seed").get<std::uint64_t>();
        if (root.contains("mode")) config.mode = parse_mode(root.at("mode"));
        if (root.contains("threads"))
            config.threads = root.at("threads").get<int>();
        if (root.contains("output"))
            config.output_path = root.at("output").get<std::string>();
        config.validate();
        return config;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config error: ") + e.what());
    }
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Per-repetition work product, slotted by repetition index so that the
// aggregation order never depends on thread scheduling.
struct RepetitionResult {
    bool ok = false;
    std::string error;
    double delta_max = 0.0;
    std::vector<double> delta;                 // per grid position
    std::vector<double> lambda2;               // per grid position
    std::vector<std::vector<double>> regrets;  // [grid][imputation]
};

} // namespace

Prior PriorSpec::materialize(int n) const {
    if (flat) return Prior::flat();
    Eigen::VectorXd mean;
    if (mean_vector) {
        if (mean_vector->size() != n)
            throw ConfigError("prior mean length does not match asset count");
        mean = *mean_vector;
    } else {
        mean = Eigen::VectorXd::Constant(n, mean_scalar.value_or(0.0));
    }
    Eigen::MatrixXd cov;
    if (cov_matrix) {
        if (cov_matrix->rows() != n || cov_matrix->cols() != n)
            throw ConfigError("prior covariance shape does not match asset count");
        cov = *cov_matrix;
    } else {
        cov = cov_scale.value_or(1.0) *
              Eigen::MatrixXd::Identity(n, n);
    }
    return Prior::gaussian(std::move(mean), SpdMatrix(std::move(cov)));
}

FactorModelSpec SyntheticSource::model() const {
    if (beta || alpha) {
        Eigen::VectorXd b = beta ? *beta : Eigen::VectorXd::Ones(n);
        Eigen::VectorXd a = alpha ? *alpha : Eigen::VectorXd::LinSpaced(n, -0.3, 0.3);
        if (b.size() != n || a.size() != n)
            throw ConfigError("beta/alpha length does not match n");
        return FactorModelSpec(std::move(b), std::move(a), risk_premium);
    }
    FactorModelSpec spec(n);
    return FactorModelSpec(spec.beta(), spec.alpha(), risk_premium);
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    return config_from_json(parse_json_text(text));
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    return config_from_json(load_json_file(path));
}

void ExperimentConfig::validate() const {
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (imputations < 2) throw ConfigError("imputations must be >= 2");
    if (delta_grid_size < 2) throw ConfigError("delta_grid_size must be >= 2");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    const PanelSplits& splits = std::holds_alternative<SyntheticSource>(source)
                                    ? std::get<SyntheticSource>(source).splits
                                    : std::get<FileSource>(source).splits;
    if (splits.t_train < 1 || splits.t_test < 1 || splits.t_oos < 1)
        throw ConfigError("t_train, t_test and t_oos must all be >= 1");
    if (std::holds_alternative<SyntheticSource>(source) &&
        std::get<SyntheticSource>(source).n < 1)
        throw ConfigError("n must be >= 1");
}

bool ExperimentConfig::rolling_windows() const {
    if (!std::holds_alternative<FileSource>(source)) return false;
    const FileSource& file = std::get<FileSource>(source);
    if (file.rolling) return *file.rolling;
    return mask.mechanism != MaskSpec::Mechanism::mcar;
}

std::string ExperimentReport::to_csv() const {
    std::string out =
        "delta,delta_over_delta_max,lambda2_star,ec_bias_sq,ec_var,ec_mse,K,M,"
        "seed\n";
    for (const DeltaRow& row : rows) {
        out += format_double(row.delta);
        out += ',';
        out += format_double(row.delta_over_delta_max);
        out += ',';
        out += format_double(row.lambda2);
        out += ',';
        out += format_double(row.stats.ec_bias_sq);
        out += ',';
        out += format_double(row.stats.ec_var);
        out += ',';
        out += format_double(row.stats.ec_mse);
        out += ',';
        out += std::to_string(row.stats.repetitions);
        out += ',';
        out += std::to_string(row.stats.imputations);
        out += ',';
        out += std::to_string(seed);
        out += '\n';
    }
    return out;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    const bool synthetic = std::holds_alternative<SyntheticSource>(config.source);
    const int grid_size = config.delta_grid_size;
    const int k_total = config.repetitions;
    const int m = config.imputations;

    // Source material shared across repetitions, loaded once.
    std::optional<FactorModelSpec> model;
    std::optional<NoiseModel> shared_noise;
    std::optional<PanelTable> table;
    PanelSplits splits;
    if (synthetic) {
        const SyntheticSource& src = std::get<SyntheticSource>(config.source);
        model = src.model();
        splits = src.splits;
        shared_noise.emplace(SpdMatrix(model->omega_true()));
    } else {
        const FileSource& src = std::get<FileSource>(config.source);
        table = read_panel_table(src.path, src.schema, false);
        splits = src.splits;
        if (!src.fit_covariance_on_window) {
            const ReturnsPanel whole(table->values, table->n_dates(), 0, 0);
            shared_noise.emplace(fit_covariance(whole, src.ridge));
        }
    }
    const bool rolling = config.rolling_windows();

    const auto run_repetition = [&](int k) -> RepetitionResult {
        RepetitionResult result;
        const std::uint64_t rep_seed = derive_seed(config.seed, static_cast<std::uint64_t>(k));

        std::optional<ReturnsPanel> panel;
        std::optional<NoiseModel> noise;
        if (synthetic) {
            panel.emplace(generate_synthetic_panel(
                *model, splits.t_train, splits.t_test, splits.t_oos,
                derive_seed(rep_seed, kPanelStream)));
            noise = shared_noise;
        } else {
            const FileSource& src = std::get<FileSource>(config.source);
            const int offset = src.start_offset + (rolling ? k : 0);
            panel.emplace(window_panel(*table, splits, offset));
            if (src.fit_covariance_on_window) {
                const ReturnsPanel fit_window(
                    panel->values().leftCols(splits.t_train + splits.t_test),
                    splits.t_train, splits.t_test, 0);
                noise.emplace(fit_covariance(fit_window, src.ridge));
            } else {
                noise = shared_noise;
            }
        }

        // mcar masks are redrawn from fresh substreams until coverage holds;
        // the deterministic mechanisms get a single attempt.
        std::optional<MissingMask> mask;
        const int attempts =
            config.mask.mechanism == MaskSpec::Mechanism::mcar ? kMaxMaskAttempts
                                                               : 1;
        for (int attempt = 0; attempt < attempts && !mask; ++attempt) {
            try {
                mask.emplace(generate_mask(
                    *panel, config.mask,
                    derive_seed(rep_seed, kMaskStreamBase +
                                              static_cast<std::uint64_t>(attempt))));
            } catch (const CoverageError&) {
                if (attempt + 1 == attempts) throw;
            }
        }

        const Prior prior = config.prior.materialize(panel->n_assets());
        const GaussianPosterior p1 =
            compute_posterior(*panel, *mask, *noise, prior, Horizon::train_only);
        const GaussianPosterior p2 =
            compute_posterior(*panel, *mask, *noise, prior, Horizon::full);
        const Consensus consensus(p1, p2);
        result.delta_max = consensus.delta_max();
        const std::vector<double> grid = consensus.delta_grid(grid_size);

        result.delta.resize(grid.size());
        result.lambda2.resize(grid.size());
        result.regrets.resize(grid.size());
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const ConsensusWeights weights = consensus.optimize_weights(grid[g]);
            const GaussianPosterior aggregated = consensus.barycenter(weights);
            const std::vector<ImputedPanel> imputations =
                impute(*panel, *mask, aggregated, *noise,
                       derive_seed(rep_seed,
                                   kImputeStreamBase + static_cast<std::uint64_t>(g)),
                       m, config.mode);
            result.delta[g] = grid[g];
            result.lambda2[g] = weights.lambda2();
            result.regrets[g].reserve(imputations.size());
            for (const ImputedPanel& imputed : imputations)
                result.regrets[g].push_back(
                    portfolio_regret(imputed, *panel).regret);
        }
        result.ok = true;
        return result;
    };

    std::vector<RepetitionResult> results(static_cast<std::size_t>(k_total));
    const int worker_count = std::min(config.threads, k_total);
    if (worker_count <= 1) {
        for (int k = 0; k < k_total; ++k) {
            try {
                results[static_cast<std::size_t>(k)] = run_repetition(k);
            } catch (const Error& e) {
                results[static_cast<std::size_t>(k)].error = e.what();
            }
        }
    } else {
        std::atomic<int> next{0};
        const auto worker = [&] {
            for (int k = next.fetch_add(1); k < k_total; k = next.fetch_add(1)) {
                try {
                    results[static_cast<std::size_t>(k)] = run_repetition(k);
                } catch (const Error& e) {
                    results[static_cast<std::size_t>(k)].error = e.what();
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(worker_count));
        for (int w = 0; w < worker_count; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    ExperimentReport report;
    report.seed = config.seed;
    report.imputations = m;
    int completed = 0;
    for (int k = 0; k < k_total; ++k) {
        const RepetitionResult& r = results[static_cast<std::size_t>(k)];
        if (r.ok) {
            ++completed;
        } else {
            log::warn("repetition ", k, " aborted: ", r.error);
        }
    }
    report.repetitions_completed = completed;
    report.repetitions_aborted = k_total - completed;
    if (report.repetitions_aborted * 5 > k_total) {
        std::ostringstream os;
        os << report.repetitions_aborted << " of " << k_total
           << " repetitions aborted (over 20%)";
        throw Error(os.str());
    }

    report.rows.resize(static_cast<std::size_t>(grid_size));
    for (int g = 0; g < grid_size; ++g) {
        DeltaRow& row = report.rows[static_cast<std::size_t>(g)];
        row.delta_over_delta_max =
            static_cast<double>(g) / static_cast<double>(grid_size - 1);
        std::vector<std::vector<double>> regrets;
        regrets.reserve(static_cast<std::size_t>(completed));
        double delta_sum = 0.0;
        double lambda_sum = 0.0;
        double delta_max_sum = 0.0;
        for (int k = 0; k < k_total; ++k) {
            const RepetitionResult& r = results[static_cast<std::size_t>(k)];
            if (!r.ok) continue;
            regrets.push_back(r.regrets[static_cast<std::size_t>(g)]);
            delta_sum += r.delta[static_cast<std::size_t>(g)];
            lambda_sum += r.lambda2[static_cast<std::size_t>(g)];
            delta_max_sum += r.delta_max;
        }
        row.stats = ecmse(regrets);
        row.delta = delta_sum / static_cast<double>(completed);
        row.lambda2 = lambda_sum / static_cast<double>(completed);
        row.mean_delta_max = delta_max_sum / static_cast<double>(completed);
    }

    if (!config.output_path.empty()) {
        std::ofstream out(config.output_path);
        if (!out)
            throw IngestError("cannot open output file: " + config.output_path);
        out << report.to_csv();
        if (!out) throw IngestError("write failed: " + config.output_path);
        log::info("wrote ", config.output_path);
    }
    return report;
}

ImputeRequest ImputeRequest::from_json_text(const std::string& text) {
    const json root = parse_json_text(text);
    try {
        check_keys(root, "impute config",
                   {"data", "prior", "delta", "imputations", "seed", "mode",
                    "output"});
        const json& data = root.at("data");
        check_keys(data, "data", {"file"});
        const FileSource src = parse_file_source(data.at("file"));
        ImputeRequest request;
        request.input_path = src.path;
        request.schema = src.schema;
        request.splits = src.splits;
        request.start_offset = src.start_offset;
        request.ridge = src.ridge;
        if (root.contains("prior")) request.prior = parse_prior(root.at("prior"));
        if (root.contains("delta")) request.delta = root.at("delta").get<double>();
        if (root.contains("imputations"))
            request.imputations = root.at("imputations").get<int>();
        if (root.contains("seed"))
            request.seed = root.at("seed").get<std::uint64_t>();
        if (root.contains("mode")) request.mode = parse_mode(root.at("mode"));
        if (root.contains("output"))
            request.output_prefix = root.at("output").get<std::string>();
        return request;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config error: ") + e.what());
    }
}

ImputeRequest ImputeRequest::from_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw ConfigError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << file.rdbuf();
    return from_json_text(buffer.str());
}

std::vector<std::string> impute_once(const ImputeRequest& request) {
    if (request.imputations < 1)
        throw ConfigError("imputations must be >= 1");
    if (request.delta < 0.0) throw ConfigError("delta must be >= 0");

    const PanelTable table =
        read_panel_table(request.input_path, request.schema, true);
    const MaskedPanel masked =
        window_masked_panel(table, request.splits, request.start_offset);

    // The noise covariance is fitted on the fully observed columns of the
    // window (the test and out-of-sample blocks are always complete).
    std::vector<int> complete_cols;
    for (int t = 0; t < masked.panel.t_total(); ++t)
        if (!masked.mask.column(t).any()) complete_cols.push_back(t);
    if (complete_cols.size() < 2)
        throw IngestError("need at least 2 fully observed columns to fit the "
                          "noise covariance");
    Eigen::MatrixXd complete(masked.panel.n_assets(),
                             static_cast<Eigen::Index>(complete_cols.size()));
    for (std::size_t c = 0; c < complete_cols.size(); ++c)
        complete.col(static_cast<Eigen::Index>(c)) =
            masked.panel.values().col(complete_cols[c]);
    const ReturnsPanel complete_panel(std::move(complete),
                                      static_cast<int>(complete_cols.size()), 0,
                                      0);
    const NoiseModel noise = fit_covariance(complete_panel, request.ridge);

    const Prior prior = request.prior.materialize(masked.panel.n_assets());
    const GaussianPosterior p1 = compute_posterior(masked.panel, masked.mask,
                                                   noise, prior,
                                                   Horizon::train_only);
    const GaussianPosterior p2 =
        compute_posterior(masked.panel, masked.mask, noise, prior, Horizon::full);
    const Consensus consensus(p1, p2);
    const ConsensusWeights weights = consensus.optimize_weights(request.delta);
    const GaussianPosterior aggregated = consensus.barycenter(weights);

    const std::vector<ImputedPanel> imputations =
        impute(masked.panel, masked.mask, aggregated, noise, request.seed,
               request.imputations, request.mode);

    std::vector<int> window_dates(
        table.dates.begin() + request.start_offset,
        table.dates.begin() + request.start_offset + request.splits.total());
    std::vector<std::string> written;
    written.reserve(imputations.size());
    for (std::size_t i = 0; i < imputations.size(); ++i) {
        char suffix[32];
        std::snprintf(suffix, sizeof(suffix), ".imp%03zu.csv", i + 1);
        const std::string path = request.output_prefix + suffix;
        const ReturnsPanel completed(imputations[i].values(),
                                     request.splits.t_train,
                                     request.splits.t_test,
                                     request.splits.t_oos);
        write_panel(path, completed, request.schema, table.names, window_dates);
        written.push_back(path);
    }
    return written;
}

} // namespace bvmi
