#pragma once

#include "shiftlab/baselines.hpp"
#include "shiftlab/dataset.hpp"
#include "shiftlab/density.hpp"
#include "shiftlab/robust_logloss.hpp"
#include "shiftlab/robust_zeroone.hpp"
#include "shiftlab/selection.hpp"

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace shiftlab {

enum class Method { LR, IWLR, SVM, IWSVM, RobustLogloss, RobustMultiview, Robust01, Adv01 };

std::string to_string(Method method);
Method parse_method(const std::string &name);
const std::vector<Method> &all_methods();

/// True for methods scored by logloss (and whose predict_proba is a calibrated distribution).
bool is_probabilistic(Method method);
/// Plain CV for LR, importance-weighted CV for the others.
CvScheme selection_scheme(Method method);

/// Density-ratio machinery shared by every method in one train/test split.
struct ShiftContext {
    /// Joint ratio with a single view covering all inputs.
    std::shared_ptr<const RatioProvider> single;
    /// Per-view ratios whose partition carries the generalized set.
    std::shared_ptr<const RatioProvider> multiview;
    std::vector<double> view_divergence;
};

struct ShiftOptions {
    RatioFitOptions ratio{};
    double kl_threshold = 0.1;
    /// Views for robust-multiview; one view per feature when absent.
    std::optional<std::vector<std::vector<int>>> views;
    /// Fixed generalized views; the KL criterion decides when absent.
    std::optional<std::vector<int>> generalized;
};

ShiftContext prepare_shift(const Eigen::MatrixXd &train_inputs, const Eigen::MatrixXd &test_inputs,
                           const ShiftOptions &options = {});

struct FitOptions {
    DescentOptions descent{};
    SubgradientOptions subgradient{};
};

/// A trained model of any method.
class Model {
  public:
    using Impl = std::variant<LinearClassifier, RobustLoglossModel, RobustZeroOneModel>;

    Model(Method method, Impl impl) : method_(method), impl_(std::move(impl)) {}

    [[nodiscard]] Method method() const { return method_; }
    [[nodiscard]] const Impl &impl() const { return impl_; }
    [[nodiscard]] int class_count() const;
    [[nodiscard]] int input_dim() const;
    [[nodiscard]] double lambda() const;
    [[nodiscard]] Eigen::VectorXd predict_proba(const Eigen::VectorXd &x) const;
    [[nodiscard]] int predict_label(const Eigen::VectorXd &x) const;
    /// -ln p(y|x) for probabilistic methods, 0-1 error otherwise.
    [[nodiscard]] double sample_loss(const Eigen::VectorXd &x, int y) const;

  private:
    Method method_;
    Impl impl_;
};

Model fit_method(Method method, const Dataset &train, double lambda, const ShiftContext &shift,
                 const FitOptions &options = {});

LambdaSelection select_method_lambda(Method method, const Dataset &train, const ShiftContext &shift,
                                     const std::vector<double> &grid, RandomSeed seed,
                                     const FitOptions &options = {});

}  // namespace shiftlab
