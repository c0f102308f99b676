#include "shiftlab/robust_logloss.hpp"

#include "shiftlab/error.hpp"
#include "shiftlab/metrics.hpp"

#include <cmath>

namespace shiftlab {

namespace {

/// Per-sample quantities that do not depend on theta.
struct SampleTerms {
    Eigen::MatrixXd scales;       // m x V, a_v(x_i)
    Eigen::VectorXd test_weight;  // P_test(x_i)/P_train(x_i)
};

SampleTerms precompute(const RobustLoglossModel &model, const Dataset &train) {
    if (train.size() == 0) {
        throw DataError("training set is empty");
    }
    if (train.dim() != model.feature_map().input_dim()) {
        throw DataError("training inputs do not match the feature map dimension");
    }
    SampleTerms terms;
    const auto m = static_cast<Eigen::Index>(train.size());
    terms.scales.resize(m, model.feature_map().view_count());
    terms.test_weight.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::VectorXd x = train.row(static_cast<std::size_t>(i));
        terms.scales.row(i) = model.exponent_scales(x).transpose();
        terms.test_weight(i) = model.test_weight(x);
    }
    return terms;
}

/// Objective value; fills `grad` (flattened) when non-null.
double evaluate(const FeatureMap &fmap, const SampleTerms &terms, const Dataset &train, const Eigen::VectorXd &flat,
                double lambda, Eigen::VectorXd *grad) {
    const int views = fmap.view_count();
    const int k = fmap.class_count();
    const auto labels = train.labels();
    const auto blocks = fmap.split(flat);
    if (grad) {
        grad->setZero(flat.size());
    }
    Eigen::VectorXd raw(views * k);  // raw(v*k + y) = theta_v . phi_v(x_v, y)
    Eigen::VectorXd scores(k);
    double total = 0.0;
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const Eigen::VectorXd x = train.row(i);
        scores.setZero();
        for (int v = 0; v < views; ++v) {
            for (int y = 0; y < k; ++y) {
                raw(v * k + y) = fmap.view_score(v, blocks[static_cast<std::size_t>(v)], x, y);
                scores(y) += terms.scales(row, v) * raw(v * k + y);
            }
        }
        const double top = scores.maxCoeff();
        const double lse = top + std::log((scores.array() - top).exp().sum());
        const double w = terms.test_weight(row);
        const int yi = labels[i];
        total += w * (lse - scores(yi));
        if (grad) {
            const Eigen::VectorXd p = (scores.array() - lse).exp();
            for (int v = 0; v < views; ++v) {
                const double wv = w * terms.scales(row, v);
                auto g = grad->segment(fmap.offset(v), fmap.block_dim(v));
                for (int y = 0; y < k; ++y) {
                    const double coef = wv * (p(y) - (y == yi ? 1.0 : 0.0));
                    if (coef != 0.0) {
                        fmap.accumulate(v, x, y, coef, g);
                    }
                }
            }
        }
    }
    const double inv_m = 1.0 / static_cast<double>(train.size());
    if (grad) {
        *grad *= inv_m;
        *grad += 2.0 * lambda * flat;
    }
    return total * inv_m + lambda * flat.squaredNorm();
}

}  // namespace

std::string to_string(GeneralizationKind kind) {
    switch (kind) {
    case GeneralizationKind::TrainDist:
        return "train";
    case GeneralizationKind::TestDist:
        return "test";
    case GeneralizationKind::Multiview:
        return "multiview";
    case GeneralizationKind::Custom:
        return "custom";
    }
    return "train";
}

GeneralizationKind parse_generalization_kind(const std::string &name) {
    if (name == "train") {
        return GeneralizationKind::TrainDist;
    }
    if (name == "test") {
        return GeneralizationKind::TestDist;
    }
    if (name == "multiview") {
        return GeneralizationKind::Multiview;
    }
    if (name == "custom") {
        return GeneralizationKind::Custom;
    }
    throw ConfigError("unknown generalization kind '" + name + "'");
}

RobustLoglossModel::RobustLoglossModel(FeatureMap fmap, GeneralizationSpec spec,
                                       std::shared_ptr<const RatioProvider> ratios, double lambda,
                                       std::vector<Eigen::VectorXd> theta)
    : fmap_(std::move(fmap)), spec_(std::move(spec)), ratios_(std::move(ratios)), lambda_(lambda),
      theta_(std::move(theta)) {
    if (theta_.empty()) {
        for (int v = 0; v < fmap_.view_count(); ++v) {
            theta_.push_back(Eigen::VectorXd::Zero(fmap_.block_dim(v)));
        }
    }
    static_cast<void>(fmap_.join(theta_));  // validates block count and sizes
    for (const auto &block : theta_) {
        if (!block.allFinite()) {
            throw NumericError("robust logloss parameters are not finite");
        }
    }
    if (spec_.kind == GeneralizationKind::Custom && !spec_.custom_ratio) {
        throw ConfigError("custom generalization spec needs a ratio function");
    }
    if (ratios_ && !(ratios_->partition().views() == fmap_.partition().views())) {
        throw ConfigError("ratio provider and feature map use different view partitions");
    }
}

RobustLoglossModel RobustLoglossModel::with_theta(std::vector<Eigen::VectorXd> theta) const {
    return RobustLoglossModel(fmap_, spec_, ratios_, lambda_, std::move(theta));
}

RobustLoglossModel RobustLoglossModel::with_flat_theta(const Eigen::VectorXd &flat) const {
    return with_theta(fmap_.split(flat));
}

const RatioProvider &RobustLoglossModel::require_ratios() const {
    if (!ratios_) {
        throw ConfigError("robust logloss model needs a fitted ratio provider");
    }
    return *ratios_;
}

Eigen::VectorXd RobustLoglossModel::exponent_scales(const Eigen::VectorXd &x) const {
    const int views = fmap_.view_count();
    switch (spec_.kind) {
    case GeneralizationKind::TestDist:
        return Eigen::VectorXd::Ones(views);
    case GeneralizationKind::TrainDist:
        return Eigen::VectorXd::Constant(views, require_ratios().joint_ratio(x));
    case GeneralizationKind::Custom:
        return Eigen::VectorXd::Constant(views, spec_.custom_ratio(x));
    case GeneralizationKind::Multiview: {
        const RatioProvider &rp = require_ratios();
        const double joint = rp.joint_ratio(x);
        Eigen::VectorXd out(views);
        const auto &partition = fmap_.partition();
        for (int v = 0; v < views; ++v) {
            out(v) = partition.is_generalized(v) ? rp.view_ratio(v, partition.extract(v, x)) : joint;
        }
        return out;
    }
    }
    return Eigen::VectorXd::Ones(views);
}

double RobustLoglossModel::test_weight(const Eigen::VectorXd &x) const {
    return 1.0 / require_ratios().joint_ratio(x);
}

Eigen::VectorXd RobustLoglossModel::scores(const Eigen::VectorXd &x) const {
    if (x.size() != fmap_.input_dim()) {
        throw DataError("input has " + std::to_string(x.size()) + " features, model expects " +
                        std::to_string(fmap_.input_dim()));
    }
    const Eigen::VectorXd scale = exponent_scales(x);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(fmap_.class_count());
    for (int v = 0; v < fmap_.view_count(); ++v) {
        for (int y = 0; y < fmap_.class_count(); ++y) {
            s(y) += scale(v) * fmap_.view_score(v, theta_[static_cast<std::size_t>(v)], x, y);
        }
    }
    return s;
}

Eigen::VectorXd RobustLoglossModel::predict_proba(const Eigen::VectorXd &x) const {
    return softmax(scores(x));
}

int RobustLoglossModel::predict_label(const Eigen::VectorXd &x) const {
    return argmax_lowest(scores(x));
}

std::vector<Eigen::VectorXd> reweighted_empirical_stats(const RobustLoglossModel &model, const Dataset &train) {
    const SampleTerms terms = precompute(model, train);
    const FeatureMap &fmap = model.feature_map();
    const auto labels = train.labels();
    Eigen::VectorXd flat = Eigen::VectorXd::Zero(fmap.total_dim());
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const Eigen::VectorXd x = train.row(i);
        for (int v = 0; v < fmap.view_count(); ++v) {
            fmap.accumulate(v, x, labels[i], terms.test_weight(row) * terms.scales(row, v),
                            flat.segment(fmap.offset(v), fmap.block_dim(v)));
        }
    }
    flat /= static_cast<double>(train.size());
    return fmap.split(flat);
}

double training_objective(const RobustLoglossModel &model, const Dataset &train) {
    const SampleTerms terms = precompute(model, train);
    return evaluate(model.feature_map(), terms, train, model.flat_theta(), model.lambda(), nullptr);
}

std::vector<Eigen::VectorXd> gradient(const RobustLoglossModel &model, const Dataset &train) {
    const SampleTerms terms = precompute(model, train);
    Eigen::VectorXd grad;
    evaluate(model.feature_map(), terms, train, model.flat_theta(), model.lambda(), &grad);
    return model.feature_map().split(grad);
}

std::pair<RobustLoglossModel, TrainReport> train_robust_logloss(const Dataset &train, const GeneralizationSpec &spec,
                                                                const FeatureMap &fmap,
                                                                std::shared_ptr<const RatioProvider> ratios,
                                                                double lambda, const DescentOptions &options) {
    if (!train.labeled()) {
        throw DataError("robust logloss training needs labeled data");
    }
    if (train.class_count() != fmap.class_count()) {
        throw DataError("training labels and feature map disagree on the class count");
    }
    if (!ratios) {
        throw ConfigError("robust logloss training needs a fitted ratio provider");
    }
    const RobustLoglossModel initial(fmap, spec, std::move(ratios), lambda);
    const SampleTerms terms = precompute(initial, train);
    const SmoothObjective objective = [&](const Eigen::VectorXd &flat, Eigen::VectorXd &grad) {
        return evaluate(fmap, terms, train, flat, lambda, &grad);
    };
    DescentResult fit = minimize(objective, Eigen::VectorXd::Zero(fmap.total_dim()), options);

    TrainReport report;
    report.iterations = fit.iterations;
    report.final_gradient_norm = fit.gradient_norm;
    report.converged = fit.converged;
    report.best_objective = fit.objective_trace.back();
    report.objective_trace = std::move(fit.objective_trace);
    return {initial.with_flat_theta(fit.x), std::move(report)};
}

double bound_term(double features, double samples, double strong_convexity, double delta) {
    if (!(features > 0.0) || !(samples > 0.0) || !(strong_convexity > 0.0) || !(delta > 0.0 && delta < 1.0)) {
        throw ConfigError("bound_term: arguments out of range");
    }
    return features * std::log(2.0 * features / delta) / (4.0 * strong_convexity * samples);
}

}  // namespace shiftlab
