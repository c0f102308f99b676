#pragma once

#include "shiftlab/dataset.hpp"
#include "shiftlab/optimize.hpp"

#include <Eigen/Dense>

#include <vector>

namespace shiftlab {

/// Inputs to the L2 regularization rule derived from feature-expectation slack.
struct DudikParams {
    double diameter = 1.0;     ///< l2 diameter D2 of the feature space, >= 0
    double confidence = 0.05;  ///< sigma in (0,1)
    double samples = 1.0;      ///< m >= 1
};

/// D2 * [1 + (2 + sqrt 2) sqrt(ln(1/sigma))] / sqrt(2 m)
double dudik_lambda(const DudikParams &p);

/// Maximum column range of `features`; the D2 estimate used for normalized data.
double max_feature_range(const Eigen::MatrixXd &features);

/// Binary logistic model separating "train" (label 0) from "test" (label 1)
/// inputs. Weights are (bias, w_1..w_d); the bias is not regularized.
struct Discriminator {
    Eigen::VectorXd weights;
    double lambda = 1.0;
    double prior_ratio = 1.0;  ///< P(test)/P(train) = n_test / n_train

    int iterations = 0;
    bool converged = true;

    /// w0 + w . x, the log-odds of "test" against "train".
    [[nodiscard]] double logit(const Eigen::Ref<const Eigen::VectorXd> &x) const;
    [[nodiscard]] double posterior_test(const Eigen::Ref<const Eigen::VectorXd> &x) const;
    /// ln[ p(train|x)/p(test|x) * prior_ratio ] = ln P_train(x)/P_test(x), unclipped.
    [[nodiscard]] double log_density_ratio(const Eigen::Ref<const Eigen::VectorXd> &x) const;

    /// The discriminator obtained by exchanging the roles of the two samples.
    [[nodiscard]] Discriminator swapped() const;

    /// Weights zero, so every ratio equals `ratio` (before clipping).
    static Discriminator constant(int dim, double ratio);
};

/// Minimizes sum_i logloss_i + lambda * ||w_{1:}||^2 on a (label 0) vs b (label 1).
/// The loss is summed over the pooled sample, not averaged.
/// Throws NumericError on a non-finite objective.
Discriminator fit_discriminator(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b, double lambda,
                                const DescentOptions &options = {});
Discriminator fit_discriminator(const Dataset &a, const Dataset &b, double lambda, const DescentOptions &options = {});

/// Joint, per-view and conditional density ratios, each clipped to [1/rho, rho].
class RatioProvider {
  public:
    RatioProvider() = default;
    RatioProvider(Discriminator joint, std::vector<Discriminator> per_view, ViewPartition partition,
                  double clip = 100.0);

    [[nodiscard]] const Discriminator &joint() const { return joint_; }
    [[nodiscard]] const Discriminator &view(int v) const { return per_view_.at(static_cast<std::size_t>(v)); }
    [[nodiscard]] const std::vector<Discriminator> &views() const { return per_view_; }
    [[nodiscard]] const ViewPartition &partition() const { return partition_; }
    [[nodiscard]] double clip() const { return clip_; }

    /// P_train(x)/P_test(x)
    [[nodiscard]] double joint_ratio(const Eigen::Ref<const Eigen::VectorXd> &x) const;
    /// P_train(x_v)/P_test(x_v), where x_v holds only the view's inputs.
    [[nodiscard]] double view_ratio(int v, const Eigen::Ref<const Eigen::VectorXd> &x_view) const;
    /// P_test(x_{-v}|x_v)/P_train(x_{-v}|x_v) from the full input.
    [[nodiscard]] double conditional_ratio(int v, const Eigen::Ref<const Eigen::VectorXd> &x) const;

    [[nodiscard]] double log_joint_ratio_unclipped(const Eigen::Ref<const Eigen::VectorXd> &x) const;
    [[nodiscard]] double log_view_ratio_unclipped(int v, const Eigen::Ref<const Eigen::VectorXd> &x_view) const;
    [[nodiscard]] double log_conditional_ratio_unclipped(int v, const Eigen::Ref<const Eigen::VectorXd> &x) const;

    /// Provider with every discriminator swapped: ratios become reciprocals.
    [[nodiscard]] RatioProvider reciprocal() const;

    /// Provider whose joint and view ratios are the constants given (before clipping).
    static RatioProvider constant(const ViewPartition &partition, double joint_ratio, double view_ratio = 1.0,
                                  double clip = 100.0);

  private:
    [[nodiscard]] double clip_log(double log_ratio) const;

    Discriminator joint_;
    std::vector<Discriminator> per_view_;
    ViewPartition partition_;
    double clip_ = 100.0;
};

struct RatioFitOptions {
    double clip = 100.0;
    double confidence = 0.05;
    /// D2; when <= 0 it is estimated as the maximum feature range of the pooled inputs.
    double diameter = -1.0;
    DescentOptions descent{};
};

/// Fits the joint and one per-view discriminator on train vs test inputs, each
/// regularized by dudik_lambda with m = n_train + n_test.
RatioProvider fit_ratio_provider(const Eigen::MatrixXd &train_inputs, const Eigen::MatrixXd &test_inputs,
                                 const ViewPartition &partition, const RatioFitOptions &options = {});

}  // namespace shiftlab
