#include "bvmi/panel.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace bvmi {

namespace {

std::string shape_string(Eigen::Index rows, Eigen::Index cols) {
    std::ostringstream os;
    os << rows << "x" << cols;
    return os.str();
}

} // namespace

ReturnsPanel::ReturnsPanel(Eigen::MatrixXd values, int t_train, int t_test,
                           int t_oos)
    : values_(std::move(values)), t_train_(t_train), t_test_(t_test),
      t_oos_(t_oos) {
    if (t_train_ < 1 || t_test_ < 0 || t_oos_ < 0)
        throw ArgumentError("panel splits require t_train >= 1 and "
                            "t_test, t_oos >= 0");
    if (values_.rows() < 1)
        throw DimensionError("panel needs at least one asset row");
    const long expected = static_cast<long>(t_train_) + t_test_ + t_oos_;
    if (values_.cols() != expected) {
        std::ostringstream os;
        os << "panel has " << values_.cols() << " columns but splits sum to "
           << expected;
        throw DimensionError(os.str());
    }
    if (!values_.allFinite())
        throw ArgumentError("panel contains non-finite entries");
}

MissingMask::MissingMask(BoolArray mask, int t_train)
    : mask_(std::move(mask)), t_train_(t_train) {
    if (t_train_ < 1)
        throw ArgumentError("mask requires t_train >= 1");
    if (mask_.cols() < t_train_)
        throw DimensionError("mask has fewer columns than t_train");
    for (Eigen::Index t = t_train_; t < mask_.cols(); ++t) {
        if (mask_.col(t).any()) {
            std::ostringstream os;
            os << "mask marks entries outside the training block (column "
               << t << "); testing and out-of-sample periods must stay "
                       "complete";
            throw ArgumentError(os.str());
        }
    }
}

ObservedSlice make_observed_slice(const ReturnsPanel& panel,
                                  const MissingMask& mask, int t) {
    if (panel.n_assets() != mask.n_assets() ||
        panel.t_total() != mask.t_total())
        throw DimensionError("panel " +
                             shape_string(panel.n_assets(), panel.t_total()) +
                             " and mask " +
                             shape_string(mask.n_assets(), mask.t_total()) +
                             " disagree");
    if (t < 0 || t >= panel.t_total())
        throw DimensionError("column index out of range");

    ObservedSlice slice;
    slice.t = t;
    const BoolColumn col = mask.column(t);
    slice.missing_indices = selected_indices(col, Block::missing);
    slice.observed_indices = selected_indices(col, Block::observed);
    slice.observed_values = project(panel.values().col(t), col, Block::observed);
    return slice;
}

std::vector<int> selected_indices(const BoolColumn& mask_column, Block which) {
    std::vector<int> idx;
    idx.reserve(static_cast<std::size_t>(mask_column.size()));
    const bool want = (which == Block::missing);
    for (Eigen::Index i = 0; i < mask_column.size(); ++i)
        if (mask_column[i] == want) idx.push_back(static_cast<int>(i));
    return idx;
}

Eigen::VectorXd project(const Eigen::VectorXd& column,
                        const BoolColumn& mask_column, Block which) {
    if (column.size() != mask_column.size())
        throw DimensionError("vector length " + std::to_string(column.size()) +
                             " does not match mask length " +
                             std::to_string(mask_column.size()));
    const std::vector<int> idx = selected_indices(mask_column, which);
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) out[static_cast<Eigen::Index>(j)] = column[idx[j]];
    return out;
}

Eigen::MatrixXd project_matrix(const Eigen::MatrixXd& s,
                               const BoolColumn& mask_column, Block rows,
                               Block cols) {
    if (s.rows() != s.cols())
        throw DimensionError("matrix is not square: " +
                             shape_string(s.rows(), s.cols()));
    if (s.rows() != mask_column.size())
        throw DimensionError("matrix dimension " + std::to_string(s.rows()) +
                             " does not match mask length " +
                             std::to_string(mask_column.size()));
    const std::vector<int> ri = selected_indices(mask_column, rows);
    const std::vector<int> ci = selected_indices(mask_column, cols);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(ri.size()),
                        static_cast<Eigen::Index>(ci.size()));
    for (std::size_t i = 0; i < ri.size(); ++i)
        for (std::size_t j = 0; j < ci.size(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                s(ri[i], ci[j]);
    return out;
}

Eigen::MatrixXd embed_observed_precision(const Eigen::MatrixXd& sub_precision,
                                         const std::vector<int>& observed_indices,
                                         int n) {
    const Eigen::Index d = sub_precision.rows();
    if (sub_precision.cols() != d)
        throw DimensionError("sub-precision is not square");
    if (static_cast<Eigen::Index>(observed_indices.size()) != d)
        throw DimensionError("index set size does not match sub-precision");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < d; ++i) {
        const int ii = observed_indices[static_cast<std::size_t>(i)];
        if (ii < 0 || ii >= n) throw DimensionError("index out of range");
        for (Eigen::Index j = 0; j < d; ++j) {
            const int jj = observed_indices[static_cast<std::size_t>(j)];
            if (jj < 0 || jj >= n) throw DimensionError("index out of range");
            out(ii, jj) = sub_precision(i, j);
        }
    }
    return out;
}

Eigen::VectorXd embed_observed_vector(const Eigen::VectorXd& sub,
                                      const std::vector<int>& observed_indices,
                                      int n) {
    if (static_cast<std::size_t>(sub.size()) != observed_indices.size())
        throw DimensionError("index set size does not match sub-vector");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < sub.size(); ++i) {
        const int ii = observed_indices[static_cast<std::size_t>(i)];
        if (ii < 0 || ii >= n) throw DimensionError("index out of range");
        out[ii] = sub[i];
    }
    return out;
}

std::vector<int> validate_coverage(const ReturnsPanel& panel,
                                   const MissingMask& mask) {
    if (panel.n_assets() != mask.n_assets() ||
        panel.t_total() != mask.t_total() ||
        panel.t_train() != mask.t_train())
        throw DimensionError("panel and mask shapes or splits disagree");
    std::vector<int> offending;
    for (int i = 0; i < panel.n_assets(); ++i) {
        bool seen = false;
        for (int t = 0; t < panel.t_train() && !seen; ++t)
            seen = !mask.mask()(i, t);
        if (!seen) offending.push_back(i);
    }
    return offending;
}

} // namespace bvmi
