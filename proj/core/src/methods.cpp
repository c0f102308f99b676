#include "shiftlab/methods.hpp"

#include "shiftlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shiftlab {

namespace {

struct MethodName {
    Method method;
    const char *name;
};

constexpr MethodName kNames[] = {
    {Method::LR, "lr"},
    {Method::IWLR, "iw-lr"},
    {Method::SVM, "svm"},
    {Method::IWSVM, "iw-svm"},
    {Method::RobustLogloss, "robust-logloss"},
    {Method::RobustMultiview, "robust-multiview"},
    {Method::Robust01, "robust-01"},
    {Method::Adv01, "adv-01"},
};

Eigen::VectorXd test_weights(const Dataset &train, const RatioProvider &ratios) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(train.size()));
    for (std::size_t i = 0; i < train.size(); ++i) {
        w(static_cast<Eigen::Index>(i)) = 1.0 / ratios.joint_ratio(train.row(i));
    }
    return w;
}

template <class... F>
struct Overloaded : F... {
    using F::operator()...;
};
template <class... F>
Overloaded(F...) -> Overloaded<F...>;

}  // namespace

std::string to_string(Method method) {
    for (const auto &entry : kNames) {
        if (entry.method == method) {
            return entry.name;
        }
    }
    return "lr";
}

Method parse_method(const std::string &name) {
    for (const auto &entry : kNames) {
        if (name == entry.name) {
            return entry.method;
        }
    }
    throw ConfigError("unknown method '" + name + "'");
}

const std::vector<Method> &all_methods() {
    static const std::vector<Method> methods = [] {
        std::vector<Method> out;
        for (const auto &entry : kNames) {
            out.push_back(entry.method);
        }
        return out;
    }();
    return methods;
}

bool is_probabilistic(Method method) {
    return method == Method::LR || method == Method::IWLR || method == Method::RobustLogloss ||
           method == Method::RobustMultiview;
}

CvScheme selection_scheme(Method method) {
    return method == Method::LR ? CvScheme::CV5 : CvScheme::IWCV5;
}

ShiftContext prepare_shift(const Eigen::MatrixXd &train_inputs, const Eigen::MatrixXd &test_inputs,
                           const ShiftOptions &options) {
    const int dim = static_cast<int>(train_inputs.cols());
    const ViewPartition views = options.views ? ViewPartition(*options.views, {}, dim) : ViewPartition::per_feature(dim);
    const RatioProvider fitted = fit_ratio_provider(train_inputs, test_inputs, views, options.ratio);

    ShiftContext ctx;
    ctx.single = std::make_shared<const RatioProvider>(fitted.joint(), std::vector<Discriminator>{fitted.joint()},
                                                       ViewPartition::single(dim), fitted.clip());
    const KlCriterion kl = kl_view_criterion(fitted, train_inputs, test_inputs, options.kl_threshold);
    ctx.view_divergence = kl.divergence;
    const ViewPartition chosen = options.generalized ? views.with_generalized(*options.generalized) : kl.partition;
    ctx.multiview = std::make_shared<const RatioProvider>(fitted.joint(), fitted.views(), chosen, fitted.clip());
    return ctx;
}

int Model::class_count() const {
    return std::visit(Overloaded{[](const LinearClassifier &m) { return m.class_count(); },
                                 [](const auto &m) { return m.class_count(); }},
                      impl_);
}

int Model::input_dim() const {
    return std::visit(Overloaded{[](const LinearClassifier &m) { return static_cast<int>(m.weights.cols()) - 1; },
                                 [](const auto &m) { return m.feature_map().input_dim(); }},
                      impl_);
}

double Model::lambda() const {
    return std::visit(Overloaded{[](const LinearClassifier &m) { return m.lambda; },
                                 [](const RobustLoglossModel &m) { return m.lambda(); },
                                 [](const RobustZeroOneModel &m) { return m.epsilon(); }},
                      impl_);
}

Eigen::VectorXd Model::predict_proba(const Eigen::VectorXd &x) const {
    return std::visit([&x](const auto &m) -> Eigen::VectorXd { return m.predict_proba(x); }, impl_);
}

int Model::predict_label(const Eigen::VectorXd &x) const {
    return std::visit([&x](const auto &m) { return m.predict_label(x); }, impl_);
}

double Model::sample_loss(const Eigen::VectorXd &x, int y) const {
    if (is_probabilistic(method_)) {
        const Eigen::VectorXd p = predict_proba(x);
        return -std::log(std::max(p(y), std::numeric_limits<double>::min()));
    }
    return predict_label(x) == y ? 0.0 : 1.0;
}

Model fit_method(Method method, const Dataset &train, double lambda, const ShiftContext &shift,
                 const FitOptions &options) {
    if (!train.labeled()) {
        throw DataError("training data must be labeled");
    }
    if (!shift.single || !shift.multiview) {
        throw ConfigError("fit_method needs prepared density ratios");
    }
    const int k = train.class_count();
    const FeatureMap single_map(ViewPartition::single(train.dim()), k);
    switch (method) {
    case Method::LR:
        return {method, fit_lr(train, lambda, std::nullopt, options.descent)};
    case Method::IWLR:
        return {method, fit_lr(train, lambda, test_weights(train, *shift.single), options.descent)};
    case Method::SVM:
        return {method, fit_svm(train, lambda, std::nullopt, options.subgradient)};
    case Method::IWSVM:
        return {method, fit_svm(train, lambda, test_weights(train, *shift.single), options.subgradient)};
    case Method::RobustLogloss:
        return {method, train_robust_logloss(train, GeneralizationSpec::train_dist(), single_map, shift.single, lambda,
                                             options.descent)
                            .first};
    case Method::RobustMultiview: {
        const FeatureMap map(shift.multiview->partition(), k);
        return {method, train_robust_logloss(train, GeneralizationSpec::multiview(), map, shift.multiview, lambda,
                                             options.descent)
                            .first};
    }
    case Method::Robust01:
        return {method,
                train_zero_one(train, ZeroOneMode::RobustTest, single_map, shift.single, lambda, options.subgradient)
                    .first};
    case Method::Adv01:
        return {method,
                train_zero_one(train, ZeroOneMode::AdvTrain, single_map, shift.single, lambda, options.subgradient)
                    .first};
    }
    throw ConfigError("unhandled method");
}

LambdaSelection select_method_lambda(Method method, const Dataset &train, const ShiftContext &shift,
                                     const std::vector<double> &grid, RandomSeed seed, const FitOptions &options) {
    const FoldFitter fitter = [&](const Dataset &fold, double lambda) -> SampleLoss {
        auto model = std::make_shared<const Model>(fit_method(method, fold, lambda, shift, options));
        return [model](const Eigen::VectorXd &x, int y) { return model->sample_loss(x, y); };
    };
    return select_lambda(fitter, train, grid, selection_scheme(method), shift.single.get(), seed);
}

}  // namespace shiftlab
