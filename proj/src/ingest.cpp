#include "bvmi/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

namespace bvmi {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> tokens;
    if (delimiter == ',') {
        std::string token;
        std::istringstream is(line);
        while (std::getline(is, token, ',')) tokens.push_back(trim(token));
        if (!line.empty() && line.back() == ',') tokens.push_back("");
    } else {
        std::istringstream is(line);
        std::string token;
        while (is >> token) tokens.push_back(token);
    }
    return tokens;
}

// YYYYMMDD or YYYY-MM-DD, returned as the integer yyyymmdd.
std::optional<int> parse_date(const std::string& token) {
    std::string digits;
    if (token.size() == 8) {
        digits = token;
    } else if (token.size() == 10 && token[4] == '-' && token[7] == '-') {
        digits = token.substr(0, 4) + token.substr(5, 2) + token.substr(8, 2);
    } else {
        return std::nullopt;
    }
    for (char c : digits)
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    return std::stoi(digits);
}

std::optional<double> parse_number(const std::string& token) {
    if (token.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size()) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

bool is_missing_sentinel(double raw) {
    return std::abs(raw - (-99.99)) < 1e-9 || std::abs(raw - (-999.0)) < 1e-9;
}

int days_in_month(int year, int month) {
    static const int lengths[12] = {31, 28, 31, 30, 31, 30,
                                    31, 31, 30, 31, 30, 31};
    if (month == 2) {
        const bool leap =
            (year % 4 == 0 && year % 100 != 0) || (year % 400 == 0);
        return leap ? 29 : 28;
    }
    return lengths[month - 1];
}

int next_day(int yyyymmdd) {
    int year = yyyymmdd / 10000;
    int month = (yyyymmdd / 100) % 100;
    int day = yyyymmdd % 100;
    if (++day > days_in_month(year, month)) {
        day = 1;
        if (++month > 12) {
            month = 1;
            ++year;
        }
    }
    return year * 10000 + month * 100 + day;
}

std::string format_date(int yyyymmdd) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%08d", yyyymmdd);
    return buf;
}

} // namespace

PanelFileSchema PanelFileSchema::ken_french() {
    PanelFileSchema schema;
    schema.delimiter = ',';
    schema.scale_divisor = 100.0;
    return schema;
}

PanelTable read_panel_table(const std::string& path,
                            const PanelFileSchema& schema, bool allow_na) {
    std::ifstream file(path);
    if (!file) throw IngestError("cannot open panel file: " + path);

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(file, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!trim(line).empty()) lines.push_back(line);
    }
    if (lines.size() < 2)
        throw IngestError("panel file needs a header and at least one row: " +
                          path);

    const char delimiter =
        schema.delimiter != '\0'
            ? schema.delimiter
            : (lines.front().find(',') != std::string::npos ? ',' : ' ');

    const std::vector<std::string> header = split_line(lines.front(), delimiter);
    if (header.size() < 2)
        throw IngestError("header must name a date column and at least one "
                          "asset column");
    if (!schema.date_column.empty() && !header.front().empty() &&
        header.front() != schema.date_column)
        throw IngestError("first header field '" + header.front() +
                          "' does not match the expected date column '" +
                          schema.date_column + "'");

    // Columns to keep, in header order restricted to the requested subset.
    std::vector<std::size_t> keep;
    std::vector<std::string> names;
    if (schema.asset_columns.empty()) {
        for (std::size_t c = 1; c < header.size(); ++c) {
            keep.push_back(c);
            names.push_back(header[c]);
        }
    } else {
        for (const std::string& wanted : schema.asset_columns) {
            const auto it = std::find(header.begin() + 1, header.end(), wanted);
            if (it == header.end())
                throw IngestError("asset column '" + wanted +
                                  "' not found in header");
            keep.push_back(static_cast<std::size_t>(it - header.begin()));
            names.push_back(wanted);
        }
    }

    std::vector<int> dates;
    std::vector<std::vector<double>> rows;   // per date, per kept asset
    std::vector<std::vector<bool>> na_rows;  // same shape
    std::vector<std::string> bad_cells;

    for (std::size_t r = 1; r < lines.size(); ++r) {
        const std::vector<std::string> tokens = split_line(lines[r], delimiter);
        if (tokens.size() != header.size()) {
            std::ostringstream os;
            os << "row " << r + 1 << " has " << tokens.size()
               << " fields, expected " << header.size();
            throw IngestError(os.str());
        }
        const std::optional<int> date = parse_date(tokens.front());
        if (!date)
            throw IngestError("row " + std::to_string(r + 1) +
                              ": cannot parse date '" + tokens.front() + "'");
        if (schema.start_date && *date < *schema.start_date) continue;
        if (schema.end_date && *date > *schema.end_date) continue;

        std::vector<double> row(keep.size(), 0.0);
        std::vector<bool> na_row(keep.size(), false);
        for (std::size_t k = 0; k < keep.size(); ++k) {
            const std::string& token = tokens[keep[k]];
            if (token == "NA") {
                if (!allow_na)
                    bad_cells.push_back("(" + tokens.front() + ", " + names[k] +
                                        "): NA");
                na_row[k] = true;
                continue;
            }
            const std::optional<double> raw = parse_number(token);
            if (!raw) {
                bad_cells.push_back("(" + tokens.front() + ", " + names[k] +
                                    "): unparseable '" + token + "'");
                continue;
            }
            if (is_missing_sentinel(*raw)) {
                bad_cells.push_back("(" + tokens.front() + ", " + names[k] +
                                    "): missing-data sentinel " + token);
                continue;
            }
            row[k] = *raw / schema.scale_divisor;
        }
        dates.push_back(*date);
        rows.push_back(std::move(row));
        na_rows.push_back(std::move(na_row));
    }

    if (!bad_cells.empty()) {
        std::ostringstream os;
        os << bad_cells.size() << " bad cell(s) in " << path << ":";
        const std::size_t shown = std::min<std::size_t>(bad_cells.size(), 10);
        for (std::size_t i = 0; i < shown; ++i) os << " " << bad_cells[i];
        if (shown < bad_cells.size()) os << " ...";
        throw IngestError(os.str());
    }
    if (dates.empty()) throw IngestError("no data rows after filtering: " + path);
    for (std::size_t i = 1; i < dates.size(); ++i)
        if (dates[i] <= dates[i - 1])
            throw IngestError("dates are not strictly increasing at row " +
                              format_date(dates[i]));

    PanelTable table;
    table.dates = std::move(dates);
    table.names = std::move(names);
    const int n = static_cast<int>(table.names.size());
    const int t = static_cast<int>(table.dates.size());
    table.values.resize(n, t);
    table.na_mask = BoolArray::Constant(n, t, false);
    for (int c = 0; c < t; ++c)
        for (int a = 0; a < n; ++a) {
            table.values(a, c) = rows[static_cast<std::size_t>(c)]
                                     [static_cast<std::size_t>(a)];
            table.na_mask(a, c) = na_rows[static_cast<std::size_t>(c)]
                                         [static_cast<std::size_t>(a)];
        }
    return table;
}

ReturnsPanel window_panel(const PanelTable& table, const PanelSplits& splits,
                          int start_offset) {
    if (start_offset < 0) throw ArgumentError("start_offset must be >= 0");
    const int len = splits.total();
    if (start_offset + len > table.n_dates()) {
        std::ostringstream os;
        os << "file has " << table.n_dates() << " usable rows, need "
           << start_offset + len;
        throw IngestError(os.str());
    }
    return ReturnsPanel(table.values.middleCols(start_offset, len),
                        splits.t_train, splits.t_test, splits.t_oos);
}

ReturnsPanel load_panel(const std::string& path, const PanelFileSchema& schema,
                        const PanelSplits& splits, int start_offset) {
    return window_panel(read_panel_table(path, schema, false), splits,
                        start_offset);
}

MaskedPanel window_masked_panel(const PanelTable& table,
                                const PanelSplits& splits, int start_offset) {
    if (start_offset < 0) throw ArgumentError("start_offset must be >= 0");
    const int len = splits.total();
    if (start_offset + len > table.n_dates())
        throw IngestError("file too short for the requested window");
    const BoolArray na = table.na_mask.middleCols(start_offset, len);
    Eigen::MatrixXd values = table.values.middleCols(start_offset, len);
    // NA cells already hold zero placeholders; their values are never read
    // (the mask routes every consumer through the observed entries).
    ReturnsPanel panel(std::move(values), splits.t_train, splits.t_test,
                       splits.t_oos);
    MissingMask mask(na, splits.t_train);
    return MaskedPanel{std::move(panel), std::move(mask)};
}

MaskedPanel load_panel_with_missing(const std::string& path,
                                    const PanelFileSchema& schema,
                                    const PanelSplits& splits,
                                    int start_offset) {
    return window_masked_panel(read_panel_table(path, schema, true), splits,
                               start_offset);
}

NoiseModel fit_covariance(const ReturnsPanel& panel,
                          std::optional<double> ridge) {
    const int t = panel.t_total();
    if (t < 2) throw ArgumentError("covariance fit needs at least 2 columns");
    if (ridge && *ridge < 0.0)
        throw ArgumentError("ridge must be non-negative");

    const Eigen::VectorXd mean = panel.values().rowwise().mean();
    const Eigen::MatrixXd centered = panel.values().colwise() - mean;
    Eigen::MatrixXd cov =
        centered * centered.transpose() / static_cast<double>(t - 1);
    cov = 0.5 * (cov + cov.transpose()).eval();

    const double lambda =
        ridge ? *ridge : 1e-8 * cov.diagonal().mean();
    cov += lambda * Eigen::MatrixXd::Identity(cov.rows(), cov.cols());
    return NoiseModel(SpdMatrix(std::move(cov)));
}

void write_panel(const std::string& path, const ReturnsPanel& panel,
                 const PanelFileSchema& schema,
                 const std::vector<std::string>& names,
                 const std::vector<int>& dates) {
    const int n = panel.n_assets();
    const int t = panel.t_total();
    if (!names.empty() && static_cast<int>(names.size()) != n)
        throw DimensionError("names length does not match asset count");
    if (!dates.empty() && static_cast<int>(dates.size()) != t)
        throw DimensionError("dates length does not match panel length");

    std::vector<std::string> use_names = names;
    if (use_names.empty()) {
        use_names.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "A%03d", i + 1);
            use_names.emplace_back(buf);
        }
    }
    std::vector<int> use_dates = dates;
    if (use_dates.empty()) {
        use_dates.reserve(static_cast<std::size_t>(t));
        int d = 20000101;
        for (int c = 0; c < t; ++c) {
            use_dates.push_back(d);
            d = next_day(d);
        }
    }

    std::ofstream file(path);
    if (!file) throw IngestError("cannot open output file: " + path);
    const char delimiter = schema.delimiter == '\0' ? ',' : schema.delimiter;

    const std::string date_header =
        schema.date_column.empty() ? "Date" : schema.date_column;
    file << date_header;
    for (const std::string& name : use_names) file << delimiter << name;
    file << "\n";
    char buf[64];
    for (int c = 0; c < t; ++c) {
        file << format_date(use_dates[static_cast<std::size_t>(c)]);
        for (int a = 0; a < n; ++a) {
            std::snprintf(buf, sizeof(buf), "%.10g",
                          panel.values()(a, c) * schema.scale_divisor);
            file << delimiter << buf;
        }
        file << "\n";
    }
    if (!file) throw IngestError("write failed: " + path);
}

} // namespace bvmi
