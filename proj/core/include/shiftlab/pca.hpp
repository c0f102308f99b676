#pragma once

#include <Eigen/Dense>

namespace shiftlab {

/// Principal axes of a sample, largest eigenvalue first.
struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;  ///< one orthonormal axis per row
    Eigen::VectorXd eigenvalues;

    [[nodiscard]] int rank() const { return static_cast<int>(components.rows()); }
    /// Scores of each row of `data` on every retained component (rows x rank).
    [[nodiscard]] Eigen::MatrixXd project(const Eigen::MatrixXd &data) const;
    [[nodiscard]] Eigen::MatrixXd reconstruct(const Eigen::MatrixXd &scores) const;
};

/// Eigendecomposition of the sample covariance (divisor m-1). Only components
/// with positive eigenvalue are kept; each axis is signed so that its
/// largest-magnitude entry is positive. Needs at least two rows.
PcaModel fit_pca(const Eigen::MatrixXd &data, int max_components = -1);

}  // namespace shiftlab
