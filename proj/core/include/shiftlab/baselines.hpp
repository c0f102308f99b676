#pragma once

#include "shiftlab/dataset.hpp"
#include "shiftlab/optimize.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace shiftlab {

enum class LinearKind { LR, IWLR, SVM, IWSVM };

std::string to_string(LinearKind kind);

/// K x (d+1) weights; row y scores class y as w_y . (1, x).
struct LinearClassifier {
    Eigen::MatrixXd weights;
    LinearKind kind = LinearKind::LR;
    double lambda = 0.0;

    [[nodiscard]] int class_count() const { return static_cast<int>(weights.rows()); }
    [[nodiscard]] Eigen::VectorXd scores(const Eigen::VectorXd &x) const;
    /// argmax score, ties to the lowest class id.
    [[nodiscard]] int predict_label(const Eigen::VectorXd &x) const;
    /// Softmax of the scores; meaningful for the LR kinds.
    [[nodiscard]] Eigen::VectorXd predict_proba(const Eigen::VectorXd &x) const;
    [[nodiscard]] bool probabilistic() const { return kind == LinearKind::LR || kind == LinearKind::IWLR; }
};

/// (1/m) sum_i w_i [ln Z(x_i) - w_{y_i} . x~_i] + lambda ||W||^2, minimized by the
/// same backtracking descent as the robust models. Weights must be positive.
/// Kind is IWLR when weights are supplied, LR otherwise.
LinearClassifier fit_lr(const Dataset &train, double lambda, const std::optional<Eigen::VectorXd> &weights = std::nullopt,
                        const DescentOptions &options = {});

double lr_objective(const LinearClassifier &model, const Dataset &train,
                    const std::optional<Eigen::VectorXd> &weights = std::nullopt);

struct SvmReport {
    std::vector<double> objective_trace;
};

/// Crammer-Singer multiclass hinge
///   (1/m) sum_i w_i max_y [1{y != y_i} + (w_y - w_{y_i}) . x~_i] + lambda ||W||^2
/// minimized by averaged subgradient descent. Weights must be non-negative.
LinearClassifier fit_svm(const Dataset &train, double lambda, const std::optional<Eigen::VectorXd> &weights = std::nullopt,
                         const SubgradientOptions &options = {}, SvmReport *report = nullptr);

double svm_objective(const LinearClassifier &model, const Dataset &train,
                     const std::optional<Eigen::VectorXd> &weights = std::nullopt);

}  // namespace shiftlab
