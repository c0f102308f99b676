#pragma once

#include "shiftlab/dataset.hpp"
#include "shiftlab/density.hpp"
#include "shiftlab/optimize.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace shiftlab {

enum class GeneralizationKind { TrainDist, TestDist, Multiview, Custom };

std::string to_string(GeneralizationKind kind);
GeneralizationKind parse_generalization_kind(const std::string &name);

/// Ratio P_gen(x)/P_test(x) for a caller-supplied generalization distribution.
using GenerationRatioFn = std::function<double(const Eigen::VectorXd &x)>;

/// Where the training feature statistics are assumed to hold.
///
/// TrainDist is the most conservative choice (robust bias-aware prediction),
/// TestDist recovers importance weighting, and Multiview trusts the marginals
/// of the generalized views of the feature map's partition. Custom takes the
/// exponent scaling directly from a callable (known densities, e.g. synthetic
/// Gaussians).
struct GeneralizationSpec {
    GeneralizationKind kind = GeneralizationKind::TrainDist;
    GenerationRatioFn custom_ratio;

    static GeneralizationSpec train_dist() { return {GeneralizationKind::TrainDist, {}}; }
    static GeneralizationSpec test_dist() { return {GeneralizationKind::TestDist, {}}; }
    static GeneralizationSpec multiview() { return {GeneralizationKind::Multiview, {}}; }
    static GeneralizationSpec custom(GenerationRatioFn ratio) { return {GeneralizationKind::Custom, std::move(ratio)}; }
};

struct TrainReport {
    int iterations = 0;
    double final_gradient_norm = 0.0;
    bool converged = false;
    std::vector<double> objective_trace;
    double best_objective = 0.0;
};

/// Parametric robust logloss predictor
///   P(y|x) ∝ exp( sum_v a_v(x) theta_v . phi_v(x_v, y) )
/// where a_v(x) is P_gen_v(x)/P_test(x): the joint ratio P_train(x)/P_test(x)
/// for TrainDist, 1 for TestDist, and for Multiview the view ratio
/// P_train(x_v)/P_test(x_v) on generalized views and the joint ratio elsewhere.
class RobustLoglossModel {
  public:
    RobustLoglossModel() = default;
    /// theta defaults to zeros (the uniform predictor).
    RobustLoglossModel(FeatureMap fmap, GeneralizationSpec spec, std::shared_ptr<const RatioProvider> ratios,
                       double lambda, std::vector<Eigen::VectorXd> theta = {});

    [[nodiscard]] const FeatureMap &feature_map() const { return fmap_; }
    [[nodiscard]] const GeneralizationSpec &spec() const { return spec_; }
    [[nodiscard]] const std::shared_ptr<const RatioProvider> &ratios() const { return ratios_; }
    [[nodiscard]] double lambda() const { return lambda_; }
    [[nodiscard]] int class_count() const { return fmap_.class_count(); }
    [[nodiscard]] const std::vector<Eigen::VectorXd> &theta() const { return theta_; }
    [[nodiscard]] Eigen::VectorXd flat_theta() const { return fmap_.join(theta_); }

    [[nodiscard]] RobustLoglossModel with_theta(std::vector<Eigen::VectorXd> theta) const;
    [[nodiscard]] RobustLoglossModel with_flat_theta(const Eigen::VectorXd &flat) const;

    /// a_v(x) for every view.
    [[nodiscard]] Eigen::VectorXd exponent_scales(const Eigen::VectorXd &x) const;
    /// P_test(x)/P_train(x): the weight that turns a training-sample average
    /// into a test-distribution expectation.
    [[nodiscard]] double test_weight(const Eigen::VectorXd &x) const;

    /// Exponent of every class before normalization.
    [[nodiscard]] Eigen::VectorXd scores(const Eigen::VectorXd &x) const;
    [[nodiscard]] Eigen::VectorXd predict_proba(const Eigen::VectorXd &x) const;
    [[nodiscard]] int predict_label(const Eigen::VectorXd &x) const;

  private:
    [[nodiscard]] const RatioProvider &require_ratios() const;

    FeatureMap fmap_;
    GeneralizationSpec spec_;
    std::shared_ptr<const RatioProvider> ratios_;
    double lambda_ = 0.0;
    std::vector<Eigen::VectorXd> theta_;
};

/// Per-view training statistic each constraint matches: the mean over samples
/// of w_v(x_i) phi_v(x_i, y_i). The sample weight is w_v = a_v(x) P_test(x)/P_train(x),
/// i.e. P_gen_v(x)/P_train(x): 1 for TrainDist and for non-generalized views,
/// P_test/P_train for TestDist, and the conditional ratio
/// P_test(x_{-v}|x_v)/P_train(x_{-v}|x_v) for generalized views (computed from the
/// clipped view and joint ratios so the gradient below is exact).
std::vector<Eigen::VectorXd> reweighted_empirical_stats(const RobustLoglossModel &model, const Dataset &train);

/// Reweighted negative log-likelihood of the test distribution estimated on
/// training samples, plus lambda ||theta||^2:
///   mean_i P_test/P_train(x_i) [ln Z(x_i) - score_{y_i}(x_i)] + lambda ||theta||^2.
double training_objective(const RobustLoglossModel &model, const Dataset &train);

/// Moment-difference gradient of training_objective: per view,
///   mean_i w_v(x_i) E_{y~P(.|x_i)} phi_v(x_i, y) - reweighted stats + 2 lambda theta_v.
std::vector<Eigen::VectorXd> gradient(const RobustLoglossModel &model, const Dataset &train);

/// Gradient descent from theta = 0 to gradient norm < 1e-6 or 2000 iterations.
/// Throws NumericError on a non-finite objective.
std::pair<RobustLoglossModel, TrainReport> train_robust_logloss(const Dataset &train, const GeneralizationSpec &spec,
                                                                const FeatureMap &fmap,
                                                                std::shared_ptr<const RatioProvider> ratios,
                                                                double lambda, const DescentOptions &options = {});

/// n ln(2n/delta) / (4 M m): excess worst-case test loss term for n features,
/// m samples, strong-convexity constant M and confidence 1 - delta.
double bound_term(double features, double samples, double strong_convexity, double delta);

}  // namespace shiftlab
