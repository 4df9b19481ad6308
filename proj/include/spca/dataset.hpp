#pragma once

#include <Eigen/Dense>

#include "spca/errors.hpp"

namespace spca {

/// An immutable n x p sample, one observation per row. All entries are
/// validated to be finite at construction.
class DataSet {
public:
    explicit DataSet(Eigen::MatrixXd rows) : rows_(std::move(rows)) {
        if (rows_.rows() < 1 || rows_.cols() < 1)
            throw DimensionMismatch("DataSet requires n >= 1 and p >= 1");
        if (!rows_.allFinite()) throw Error("DataSet entries must be finite");
    }

    Eigen::Index n() const noexcept { return rows_.rows(); }
    Eigen::Index p() const noexcept { return rows_.cols(); }
    const Eigen::MatrixXd& rows() const noexcept { return rows_; }
    Eigen::VectorXd row(Eigen::Index i) const { return rows_.row(i).transpose(); }

    bool all_zero() const noexcept { return rows_.cwiseAbs().maxCoeff() == 0.0; }

private:
    Eigen::MatrixXd rows_;
};

}  // namespace spca
