#include "shiftlab/pca.hpp"

#include "shiftlab/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

namespace shiftlab {

Eigen::MatrixXd PcaModel::project(const Eigen::MatrixXd &data) const {
    if (data.cols() != mean.size()) {
        throw DataError("PCA projection: input has " + std::to_string(data.cols()) + " columns, model expects " +
                        std::to_string(mean.size()));
    }
    return (data.rowwise() - mean.transpose()) * components.transpose();
}

Eigen::MatrixXd PcaModel::reconstruct(const Eigen::MatrixXd &scores) const {
    return (scores * components).rowwise() + mean.transpose();
}

PcaModel fit_pca(const Eigen::MatrixXd &data, int max_components) {
    if (data.rows() < 2) {
        throw DataError("PCA needs at least two rows");
    }
    if (!data.allFinite()) {
        throw DataError("PCA input contains non-finite values");
    }
    PcaModel model;
    model.mean = data.colwise().mean().transpose();
    const Eigen::MatrixXd centered = data.rowwise() - model.mean.transpose();
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(data.rows() - 1);

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw NumericError("PCA eigendecomposition failed");
    }
    // eigenvalues come back ascending; anything at rounding level of the top one is noise
    const Eigen::VectorXd &values = solver.eigenvalues();
    const double top = values.size() > 0 ? values(values.size() - 1) : 0.0;
    const double floor = std::max(top, 0.0) * 1e-12 * static_cast<double>(cov.rows());
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = values.size() - 1; j >= 0; --j) {
        if (values(j) > floor && values(j) > 0.0) {
            keep.push_back(j);
        }
    }
    if (max_components >= 0 && keep.size() > static_cast<std::size_t>(max_components)) {
        keep.resize(static_cast<std::size_t>(max_components));
    }
    model.components.resize(static_cast<Eigen::Index>(keep.size()), data.cols());
    model.eigenvalues.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t r = 0; r < keep.size(); ++r) {
        Eigen::VectorXd axis = solver.eigenvectors().col(keep[r]);
        Eigen::Index pivot = 0;
        axis.cwiseAbs().maxCoeff(&pivot);
        if (axis(pivot) < 0.0) {
            axis = -axis;
        }
        model.components.row(static_cast<Eigen::Index>(r)) = axis.transpose();
        model.eigenvalues(static_cast<Eigen::Index>(r)) = values(keep[r]);
    }
    return model;
}

}  // namespace shiftlab
