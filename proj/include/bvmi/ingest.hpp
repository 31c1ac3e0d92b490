#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bvmi/panel.hpp"
#include "bvmi/posterior.hpp"

namespace bvmi {

// Shape of a delimited panel file: a header row naming the date column
// followed by one column per asset; one row per date, dates strictly
// increasing, formatted as YYYYMMDD or ISO-8601 (YYYY-MM-DD). Values are
// divided by scale_divisor on load (100 for percent-quoted sources).
struct PanelFileSchema {
    std::string date_column = "Date"; // matched against the header's first field
    std::vector<std::string> asset_columns; // subset to keep; empty = all
    char delimiter = '\0';                  // '\0' = auto (comma or whitespace)
    double scale_divisor = 1.0;
    std::optional<int> start_date; // inclusive YYYYMMDD bound
    std::optional<int> end_date;   // inclusive YYYYMMDD bound

    // Daily Kenneth French library files: comma-delimited, percent-quoted.
    static PanelFileSchema ken_french();
};

struct PanelSplits {
    int t_train = 0;
    int t_test = 0;
    int t_oos = 0;
    int total() const { return t_train + t_test + t_oos; }
};

// Fully parsed source file: values are assets x dates, already scaled.
// na_mask marks cells that contained the literal token NA.
struct PanelTable {
    std::vector<int> dates;
    std::vector<std::string> names;
    Eigen::MatrixXd values;
    BoolArray na_mask;

    int n_assets() const { return static_cast<int>(values.rows()); }
    int n_dates() const { return static_cast<int>(values.cols()); }
};

// Parses the whole file. Unparseable numerics and the -99.99 / -999
// missing-data sentinels raise IngestError naming the offending cells.
// NA tokens are only accepted when allow_na is set.
PanelTable read_panel_table(const std::string& path,
                            const PanelFileSchema& schema,
                            bool allow_na = false);

// Window of length splits.total() starting at date row start_offset.
ReturnsPanel load_panel(const std::string& path, const PanelFileSchema& schema,
                        const PanelSplits& splits, int start_offset = 0);

ReturnsPanel window_panel(const PanelTable& table, const PanelSplits& splits,
                          int start_offset);

// Same, for files that mark missing training cells with NA. NA cells become
// zero placeholders in the panel and true entries in the mask; NA outside
// the training block is rejected (those periods must stay complete).
struct MaskedPanel {
    ReturnsPanel panel;
    MissingMask mask;
};

MaskedPanel load_panel_with_missing(const std::string& path,
                                    const PanelFileSchema& schema,
                                    const PanelSplits& splits,
                                    int start_offset = 0);

MaskedPanel window_masked_panel(const PanelTable& table,
                                const PanelSplits& splits, int start_offset);

// Sample covariance over all columns (T - 1 denominator) plus ridge * I.
// Without an explicit ridge, 1e-8 * mean(diagonal) is used.
NoiseModel fit_covariance(const ReturnsPanel& panel,
                          std::optional<double> ridge = std::nullopt);

// Writes a panel in the same file format, values re-multiplied by the
// schema's scale divisor, 10 significant digits. Missing names or dates are
// synthesized (A001..., consecutive days from 2000-01-01).
void write_panel(const std::string& path, const ReturnsPanel& panel,
                 const PanelFileSchema& schema = {},
                 const std::vector<std::string>& names = {},
                 const std::vector<int>& dates = {});

} // namespace bvmi
