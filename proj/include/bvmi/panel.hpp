#pragma once

#include <vector>

#include <Eigen/Core>

#include "bvmi/errors.hpp"

namespace bvmi {

using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
using BoolColumn = Eigen::Array<bool, Eigen::Dynamic, 1>;

// Asset-by-time return panel, columns ordered in time, partitioned into a
// training block, a testing block and an out-of-sample block:
//
//   columns [0, t_train)                     training
//   columns [t_train, t_train + t_test)      testing
//   columns [t_train + t_test, T)            out-of-sample
//
// Entries must be finite; the panel is immutable after construction.
class ReturnsPanel {
public:
    ReturnsPanel(Eigen::MatrixXd values, int t_train, int t_test, int t_oos);

    const Eigen::MatrixXd& values() const { return values_; }
    int n_assets() const { return static_cast<int>(values_.rows()); }
    int t_total() const { return static_cast<int>(values_.cols()); }
    int t_train() const { return t_train_; }
    int t_test() const { return t_test_; }
    int t_oos() const { return t_oos_; }

private:
    Eigen::MatrixXd values_;
    int t_train_;
    int t_test_;
    int t_oos_;
};

// Boolean missingness pattern over a panel (true = missing). Entries may be
// marked missing only inside the training block; the testing and
// out-of-sample blocks stay complete, so construction rejects masks that
// touch columns >= t_train.
class MissingMask {
public:
    MissingMask(BoolArray mask, int t_train);

    const BoolArray& mask() const { return mask_; }
    int n_assets() const { return static_cast<int>(mask_.rows()); }
    int t_total() const { return static_cast<int>(mask_.cols()); }
    int t_train() const { return t_train_; }

    BoolColumn column(int t) const { return mask_.col(t); }
    bool any_missing() const { return mask_.any(); }
    Eigen::Index missing_count() const { return mask_.count(); }

private:
    BoolArray mask_;
    int t_train_;
};

// One time column split into its observed and missing parts. Both index
// sets are kept sorted ascending so projections are deterministic.
struct ObservedSlice {
    int t = 0;
    Eigen::VectorXd observed_values;   // entries of the column where mask is false
    std::vector<int> missing_indices;  // ascending
    std::vector<int> observed_indices; // ascending
};

ObservedSlice make_observed_slice(const ReturnsPanel& panel,
                                  const MissingMask& mask, int t);

enum class Block { missing, observed };

// Indices selected by a mask column, ascending.
std::vector<int> selected_indices(const BoolColumn& mask_column, Block which);

// Entries of `column` at the indices selected by `which`, in ascending index
// order. Selecting nothing yields a 0-vector.
Eigen::VectorXd project(const Eigen::VectorXd& column,
                        const BoolColumn& mask_column, Block which);

// Submatrix of a symmetric matrix on the selected row/column index sets.
// (rows, cols) = (missing, missing) and (observed, observed) give the
// principal blocks; (missing, observed) gives the cross block with rows
// indexed by the missing set.
Eigen::MatrixXd project_matrix(const Eigen::MatrixXd& s,
                               const BoolColumn& mask_column, Block rows,
                               Block cols);

inline Eigen::MatrixXd project_matrix(const Eigen::MatrixXd& s,
                                      const BoolColumn& mask_column,
                                      Block which) {
    return project_matrix(s, mask_column, which, which);
}

// Scatters a d x d block back into an n x n matrix: entry (i, j) of `sub`
// lands at (indices[i], indices[j]); everything else is zero. Inverse of
// taking the principal submatrix on `indices`.
Eigen::MatrixXd embed_observed_precision(const Eigen::MatrixXd& sub_precision,
                                         const std::vector<int>& observed_indices,
                                         int n);

// Vector counterpart: entry i of `sub` lands at indices[i], zeros elsewhere.
Eigen::VectorXd embed_observed_vector(const Eigen::VectorXd& sub,
                                      const std::vector<int>& observed_indices,
                                      int n);

// Rows with no observed entry in the training block (empty == every asset is
// observed at least once while training, which the flat-prior posterior
// needs for a non-singular precision).
std::vector<int> validate_coverage(const ReturnsPanel& panel,
                                   const MissingMask& mask);

} // namespace bvmi
