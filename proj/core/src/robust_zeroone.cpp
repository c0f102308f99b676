#include "shiftlab/robust_zeroone.hpp"

#include "shiftlab/error.hpp"
#include "shiftlab/metrics.hpp"

#include <cmath>

namespace shiftlab {

std::string to_string(ZeroOneMode mode) {
    return mode == ZeroOneMode::RobustTest ? "robust-test" : "adv-train";
}

ZeroOneMode parse_zero_one_mode(const std::string &name) {
    if (name == "robust-test") {
        return ZeroOneMode::RobustTest;
    }
    if (name == "adv-train") {
        return ZeroOneMode::AdvTrain;
    }
    throw ConfigError("unknown 0-1 mode '" + name + "'");
}

RobustZeroOneModel::RobustZeroOneModel(FeatureMap fmap, ZeroOneMode mode, std::shared_ptr<const RatioProvider> ratios,
                                       double epsilon, std::vector<Eigen::VectorXd> theta)
    : fmap_(std::move(fmap)), mode_(mode), ratios_(std::move(ratios)), epsilon_(epsilon), theta_(std::move(theta)) {
    if (theta_.empty()) {
        for (int v = 0; v < fmap_.view_count(); ++v) {
            theta_.push_back(Eigen::VectorXd::Zero(fmap_.block_dim(v)));
        }
    }
    static_cast<void>(fmap_.join(theta_));
    for (const auto &block : theta_) {
        if (!block.allFinite()) {
            throw NumericError("0-1 model parameters are not finite");
        }
    }
    if (mode_ == ZeroOneMode::RobustTest && !ratios_) {
        throw ConfigError("robust 0-1 model needs a fitted ratio provider");
    }
}

RobustZeroOneModel RobustZeroOneModel::with_flat_theta(const Eigen::VectorXd &flat) const {
    return RobustZeroOneModel(fmap_, mode_, ratios_, epsilon_, fmap_.split(flat));
}

double RobustZeroOneModel::potential_scale(const Eigen::VectorXd &x) const {
    return mode_ == ZeroOneMode::RobustTest ? ratios_->joint_ratio(x) : 1.0;
}

Potentials RobustZeroOneModel::potentials_at(const Eigen::VectorXd &x) const {
    if (x.size() != fmap_.input_dim()) {
        throw DataError("input has " + std::to_string(x.size()) + " features, model expects " +
                        std::to_string(fmap_.input_dim()));
    }
    const double r = potential_scale(x);
    Potentials psi = Potentials::Zero(fmap_.class_count());
    for (int v = 0; v < fmap_.view_count(); ++v) {
        for (int y = 0; y < fmap_.class_count(); ++y) {
            psi(y) += fmap_.view_score(v, theta_[static_cast<std::size_t>(v)], x, y);
        }
    }
    psi *= r;
    if (!psi.allFinite()) {
        throw NumericError("non-finite potentials");
    }
    return psi;
}

GameSolution RobustZeroOneModel::inner_equilibrium(const Eigen::VectorXd &x) const {
    return solve_minimax(augment(zero_one_cost(fmap_.class_count()), potentials_at(x)));
}

Eigen::VectorXd RobustZeroOneModel::predict_proba(const Eigen::VectorXd &x) const {
    return inner_equilibrium(x).p_hat;
}

int RobustZeroOneModel::predict_label(const Eigen::VectorXd &x) const {
    return argmax_lowest(inner_equilibrium(x).p_hat);
}

ZeroOneStep zero_one_step(const RobustZeroOneModel &model, const Dataset &train) {
    if (train.size() == 0) {
        throw DataError("training set is empty");
    }
    const FeatureMap &fmap = model.feature_map();
    const auto labels = train.labels();
    const CostMatrix cost = zero_one_cost(fmap.class_count());
    const Eigen::VectorXd theta = model.flat_theta();
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(fmap.total_dim());
    Eigen::VectorXd phi_tilde = Eigen::VectorXd::Zero(fmap.total_dim());
    double value_sum = 0.0;
    for (std::size_t i = 0; i < train.size(); ++i) {
        const Eigen::VectorXd x = train.row(i);
        const GameSolution game = solve_minimax(augment(cost, model.potentials_at(x)));
        const double g = model.mode() == ZeroOneMode::RobustTest ? 1.0 / model.potential_scale(x) : 1.0;
        value_sum += g * game.value;
        for (int v = 0; v < fmap.view_count(); ++v) {
            for (int y = 0; y < fmap.class_count(); ++y) {
                if (game.p_check(y) != 0.0) {
                    fmap.accumulate(v, x, y, game.p_check(y), expected.segment(fmap.offset(v), fmap.block_dim(v)));
                }
            }
            fmap.accumulate(v, x, labels[i], 1.0, phi_tilde.segment(fmap.offset(v), fmap.block_dim(v)));
        }
    }
    const double inv_m = 1.0 / static_cast<double>(train.size());
    expected *= inv_m;
    phi_tilde *= inv_m;
    const Eigen::VectorXd grad = expected - phi_tilde + 2.0 * model.epsilon() * theta;

    ZeroOneStep step;
    step.objective = value_sum * inv_m - theta.dot(phi_tilde) + model.epsilon() * theta.squaredNorm();
    step.subgradient = fmap.split(grad);
    return step;
}

std::vector<Eigen::VectorXd> subgradient(const RobustZeroOneModel &model, const Dataset &train) {
    return zero_one_step(model, train).subgradient;
}

std::pair<RobustZeroOneModel, TrainReport> train_zero_one(const Dataset &train, ZeroOneMode mode,
                                                          const FeatureMap &fmap,
                                                          std::shared_ptr<const RatioProvider> ratios, double epsilon,
                                                          const SubgradientOptions &options) {
    if (!train.labeled()) {
        throw DataError("0-1 training needs labeled data");
    }
    if (train.class_count() != fmap.class_count()) {
        throw DataError("training labels and feature map disagree on the class count");
    }
    const RobustZeroOneModel initial(fmap, mode, std::move(ratios), epsilon);
    const NonsmoothObjective objective = [&](const Eigen::VectorXd &flat, Eigen::VectorXd &g) {
        ZeroOneStep step = zero_one_step(initial.with_flat_theta(flat), train);
        g = fmap.join(step.subgradient);
        return step.objective;
    };
    SubgradientResult fit = subgradient_descent(objective, Eigen::VectorXd::Zero(fmap.total_dim()), options, epsilon);

    TrainReport report;
    report.iterations = options.iterations;
    report.final_gradient_norm = fit.final_subgradient_norm;
    report.converged = false;
    report.best_objective = fit.best_objective;
    report.objective_trace = std::move(fit.objective_trace);
    return {initial.with_flat_theta(fit.averaged), std::move(report)};
}

}  // namespace shiftlab
