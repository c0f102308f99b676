#pragma once

#include "shiftlab/dataset.hpp"
#include "shiftlab/density.hpp"
#include "shiftlab/random.hpp"

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <vector>

namespace shiftlab {

struct KlCriterion {
    ViewPartition partition;         ///< input partition with V_g filled in
    std::vector<double> divergence;  ///< symmetric KL estimate per view
};

/// Per view, estimates the symmetric KL divergence between the training and
/// test marginals of x_v from the view discriminator, with
///   P_train(x_v) proportional to p(train | x_v) and P_test(x_v) to p(test | x_v),
/// both normalized over the pooled inputs and their ratio clipped to
/// [1/rho, rho]. A view is generalized iff its divergence is below `threshold`.
KlCriterion kl_view_criterion(const RatioProvider &rp, const Eigen::MatrixXd &train_inputs,
                              const Eigen::MatrixXd &test_inputs, double threshold = 0.1);

enum class CvScheme { CV5, IWCV5 };

/// Loss of a fitted model on one labeled example.
using SampleLoss = std::function<double(const Eigen::VectorXd &x, int y)>;
/// Fits on a fold's training part at the given lambda.
using FoldFitter = std::function<SampleLoss(const Dataset &fold_train, double lambda)>;

inline const std::vector<double> &default_lambda_grid() {
    static const std::vector<double> grid{1.0 / 65536.0, 1.0 / 4096.0, 1.0 / 256.0, 1.0 / 16.0, 1.0};
    return grid;
}

struct LambdaSelection {
    double lambda = 1.0;
    std::vector<double> grid;                     ///< ascending
    std::vector<double> mean_loss;                ///< per grid entry
    std::vector<std::vector<double>> fold_score;  ///< [grid entry][fold]
};

/// Folds assigned by a seeded shuffle: position j of the permutation goes to fold j mod k.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, int k, RandomSeed seed);

/// k-fold (default 5) selection. Each fold score is the mean held-out loss,
/// weighted by P_test(x)/P_train(x) = 1/joint_ratio(x) under IWCV5. The grid
/// entry with the lowest mean fold score wins; ties go to the larger lambda.
/// `ratios` is required for IWCV5 and ignored for CV5.
LambdaSelection select_lambda(const FoldFitter &fit, const Dataset &train, const std::vector<double> &grid,
                              CvScheme scheme, const RatioProvider *ratios, RandomSeed seed, int folds = 5);

}  // namespace shiftlab
