#pragma once

#include "shiftlab/dataset.hpp"
#include "shiftlab/density.hpp"
#include "shiftlab/game.hpp"
#include "shiftlab/optimize.hpp"
#include "shiftlab/robust_logloss.hpp"

#include <memory>
#include <string>
#include <vector>

namespace shiftlab {

/// RobustTest minimizes the worst-case 0-1 loss on the test distribution with
/// P_gen = P_train; AdvTrain minimizes the adversarial 0-1 loss on the training
/// distribution and ignores the shift.
enum class ZeroOneMode { RobustTest, AdvTrain };

std::string to_string(ZeroOneMode mode);
ZeroOneMode parse_zero_one_mode(const std::string &name);

class RobustZeroOneModel {
  public:
    RobustZeroOneModel() = default;
    RobustZeroOneModel(FeatureMap fmap, ZeroOneMode mode, std::shared_ptr<const RatioProvider> ratios,
                       double epsilon, std::vector<Eigen::VectorXd> theta = {});

    [[nodiscard]] const FeatureMap &feature_map() const { return fmap_; }
    [[nodiscard]] ZeroOneMode mode() const { return mode_; }
    [[nodiscard]] const std::shared_ptr<const RatioProvider> &ratios() const { return ratios_; }
    [[nodiscard]] double epsilon() const { return epsilon_; }
    [[nodiscard]] int class_count() const { return fmap_.class_count(); }
    [[nodiscard]] const std::vector<Eigen::VectorXd> &theta() const { return theta_; }
    [[nodiscard]] Eigen::VectorXd flat_theta() const { return fmap_.join(theta_); }
    [[nodiscard]] RobustZeroOneModel with_flat_theta(const Eigen::VectorXd &flat) const;

    /// r(x): P_train(x)/P_test(x) in RobustTest mode, 1 in AdvTrain mode.
    [[nodiscard]] double potential_scale(const Eigen::VectorXd &x) const;

    /// psi_y = r(x) sum_v theta_v . phi_v(x_v, y)
    [[nodiscard]] Potentials potentials_at(const Eigen::VectorXd &x) const;

    /// Equilibrium of the 0-1 cost matrix augmented with potentials_at(x).
    [[nodiscard]] GameSolution inner_equilibrium(const Eigen::VectorXd &x) const;

    /// Estimator equilibrium strategy, used as the predictive distribution.
    [[nodiscard]] Eigen::VectorXd predict_proba(const Eigen::VectorXd &x) const;

    /// argmax of the estimator strategy, ties to the lowest class id.
    [[nodiscard]] int predict_label(const Eigen::VectorXd &x) const;

  private:
    FeatureMap fmap_;
    ZeroOneMode mode_ = ZeroOneMode::RobustTest;
    std::shared_ptr<const RatioProvider> ratios_;
    double epsilon_ = 0.0;
    std::vector<Eigen::VectorXd> theta_;
};

/// Objective estimate and subgradient at the model's theta.
struct ZeroOneStep {
    double objective = 0.0;
    std::vector<Eigen::VectorXd> subgradient;
};

/// Per view: mean_i E_{y~p_check(x_i)} phi_v(x_i, y) - mean_i phi_v(x_i, y_i) + 2 eps theta_v.
/// The objective is mean_i g(x_i) value(x_i) - theta . phi_tilde + eps ||theta||^2 with
/// g = P_test/P_train in RobustTest mode (test expectation from training samples)
/// and g = 1 in AdvTrain mode.
ZeroOneStep zero_one_step(const RobustZeroOneModel &model, const Dataset &train);

std::vector<Eigen::VectorXd> subgradient(const RobustZeroOneModel &model, const Dataset &train);

/// Subgradient descent from theta = 0 with eta_t = eta_0/sqrt(t); returns the
/// average of the second half of the iterates.
std::pair<RobustZeroOneModel, TrainReport> train_zero_one(const Dataset &train, ZeroOneMode mode,
                                                          const FeatureMap &fmap,
                                                          std::shared_ptr<const RatioProvider> ratios, double epsilon,
                                                          const SubgradientOptions &options = {});

}  // namespace shiftlab
