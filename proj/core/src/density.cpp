#include "shiftlab/density.hpp"

#include "shiftlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace shiftlab {

namespace {

// log(1 + e^z) without overflow
double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

double dudik_lambda(const DudikParams &p) {
    if (p.diameter < 0.0 || !(p.confidence > 0.0 && p.confidence < 1.0) || p.samples < 1.0) {
        throw ConfigError("dudik_lambda: parameters out of range");
    }
    const double slack = 1.0 + (2.0 + std::numbers::sqrt2) * std::sqrt(std::log(1.0 / p.confidence));
    return p.diameter * slack / std::sqrt(2.0 * p.samples);
}

double max_feature_range(const Eigen::MatrixXd &features) {
    if (features.rows() == 0 || features.cols() == 0) {
        return 0.0;
    }
    return (features.colwise().maxCoeff() - features.colwise().minCoeff()).maxCoeff();
}

double Discriminator::logit(const Eigen::Ref<const Eigen::VectorXd> &x) const {
    if (x.size() + 1 != weights.size()) {
        throw DataError("discriminator input has " + std::to_string(x.size()) + " entries, expected " +
                        std::to_string(weights.size() - 1));
    }
    return weights(0) + weights.tail(x.size()).dot(x);
}

double Discriminator::posterior_test(const Eigen::Ref<const Eigen::VectorXd> &x) const {
    return sigmoid(logit(x));
}

double Discriminator::log_density_ratio(const Eigen::Ref<const Eigen::VectorXd> &x) const {
    // p(train|x)/p(test|x) = exp(-logit)
    return -logit(x) + std::log(prior_ratio);
}

Discriminator Discriminator::swapped() const {
    Discriminator out = *this;
    out.weights = -weights;
    out.prior_ratio = 1.0 / prior_ratio;
    return out;
}

Discriminator Discriminator::constant(int dim, double ratio) {
    if (!(ratio > 0.0) || !std::isfinite(ratio)) {
        throw ConfigError("constant discriminator ratio must be positive and finite");
    }
    Discriminator out;
    out.weights = Eigen::VectorXd::Zero(dim + 1);
    out.prior_ratio = ratio;
    return out;
}

Discriminator fit_discriminator(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b, double lambda,
                                const DescentOptions &options) {
    if (a.rows() == 0 || b.rows() == 0) {
        throw DataError("fit_discriminator: both samples must be nonempty");
    }
    if (a.cols() != b.cols()) {
        throw DataError("fit_discriminator: samples have different dimensions");
    }
    if (!(lambda > 0.0)) {
        throw ConfigError("fit_discriminator: lambda must be positive");
    }
    const Eigen::Index d = a.cols();
    const Eigen::Index n = a.rows() + b.rows();
    Eigen::MatrixXd design(n, d + 1);
    design.col(0).setOnes();
    design.block(0, 1, a.rows(), d) = a;
    design.block(a.rows(), 1, b.rows(), d) = b;
    Eigen::VectorXd target = Eigen::VectorXd::Zero(n);
    target.tail(b.rows()).setOnes();

    const SmoothObjective objective = [&](const Eigen::VectorXd &w, Eigen::VectorXd &grad) {
        const Eigen::VectorXd z = design * w;
        Eigen::VectorXd residual(n);
        double loss = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            loss += softplus(z(i)) - target(i) * z(i);
            residual(i) = sigmoid(z(i)) - target(i);
        }
        grad.noalias() = design.transpose() * residual;
        grad.tail(d) += 2.0 * lambda * w.tail(d);
        return loss + lambda * w.tail(d).squaredNorm();
    };

    const DescentResult fit = minimize(objective, Eigen::VectorXd::Zero(d + 1), options);
    Discriminator out;
    out.weights = fit.x;
    out.lambda = lambda;
    out.prior_ratio = static_cast<double>(b.rows()) / static_cast<double>(a.rows());
    out.iterations = fit.iterations;
    out.converged = fit.converged;
    return out;
}

Discriminator fit_discriminator(const Dataset &a, const Dataset &b, double lambda, const DescentOptions &options) {
    return fit_discriminator(a.features(), b.features(), lambda, options);
}

// ---------------------------------------------------------------------------

RatioProvider::RatioProvider(Discriminator joint, std::vector<Discriminator> per_view, ViewPartition partition,
                             double clip)
    : joint_(std::move(joint)), per_view_(std::move(per_view)), partition_(std::move(partition)), clip_(clip) {
    if (!(clip_ >= 1.0)) {
        throw ConfigError("ratio clip bound must be >= 1");
    }
    if (joint_.weights.size() != partition_.dim() + 1) {
        throw DataError("joint discriminator dimension does not match the partition");
    }
    if (static_cast<int>(per_view_.size()) != partition_.view_count()) {
        throw DataError("ratio provider needs one discriminator per view");
    }
    for (int v = 0; v < partition_.view_count(); ++v) {
        if (view(v).weights.size() != static_cast<Eigen::Index>(partition_.indices(v).size()) + 1) {
            throw DataError("view discriminator " + std::to_string(v) + " has the wrong dimension");
        }
    }
}

double RatioProvider::clip_log(double log_ratio) const {
    const double bound = std::log(clip_);
    return std::exp(std::clamp(log_ratio, -bound, bound));
}

double RatioProvider::log_joint_ratio_unclipped(const Eigen::Ref<const Eigen::VectorXd> &x) const {
    return joint_.log_density_ratio(x);
}

double RatioProvider::log_view_ratio_unclipped(int v, const Eigen::Ref<const Eigen::VectorXd> &x_view) const {
    return view(v).log_density_ratio(x_view);
}

double RatioProvider::log_conditional_ratio_unclipped(int v, const Eigen::Ref<const Eigen::VectorXd> &x) const {
    return -log_joint_ratio_unclipped(x) + log_view_ratio_unclipped(v, partition_.extract(v, x));
}

double RatioProvider::joint_ratio(const Eigen::Ref<const Eigen::VectorXd> &x) const {
    return clip_log(log_joint_ratio_unclipped(x));
}

double RatioProvider::view_ratio(int v, const Eigen::Ref<const Eigen::VectorXd> &x_view) const {
    return clip_log(log_view_ratio_unclipped(v, x_view));
}

double RatioProvider::conditional_ratio(int v, const Eigen::Ref<const Eigen::VectorXd> &x) const {
    return clip_log(log_conditional_ratio_unclipped(v, x));
}

RatioProvider RatioProvider::reciprocal() const {
    std::vector<Discriminator> views;
    views.reserve(per_view_.size());
    for (const auto &d : per_view_) {
        views.push_back(d.swapped());
    }
    return RatioProvider(joint_.swapped(), std::move(views), partition_, clip_);
}

RatioProvider RatioProvider::constant(const ViewPartition &partition, double joint_ratio, double view_ratio,
                                      double clip) {
    std::vector<Discriminator> views;
    for (int v = 0; v < partition.view_count(); ++v) {
        views.push_back(Discriminator::constant(static_cast<int>(partition.indices(v).size()), view_ratio));
    }
    return RatioProvider(Discriminator::constant(partition.dim(), joint_ratio), std::move(views), partition, clip);
}

RatioProvider fit_ratio_provider(const Eigen::MatrixXd &train_inputs, const Eigen::MatrixXd &test_inputs,
                                 const ViewPartition &partition, const RatioFitOptions &options) {
    if (train_inputs.cols() != partition.dim() || test_inputs.cols() != partition.dim()) {
        throw DataError("fit_ratio_provider: input dimension does not match the view partition");
    }
    const double samples = static_cast<double>(train_inputs.rows() + test_inputs.rows());
    auto lambda_for = [&](const Eigen::MatrixXd &a, const Eigen::MatrixXd &b) {
        double diameter = options.diameter;
        if (diameter <= 0.0) {
            Eigen::MatrixXd pooled(a.rows() + b.rows(), a.cols());
            pooled << a, b;
            diameter = max_feature_range(pooled);
        }
        // all-constant inputs carry no signal; any positive weight keeps the fit well posed
        const double lambda = dudik_lambda({diameter, options.confidence, samples});
        return lambda > 0.0 ? lambda : 1.0;
    };

    Discriminator joint =
        fit_discriminator(train_inputs, test_inputs, lambda_for(train_inputs, test_inputs), options.descent);
    std::vector<Discriminator> views;
    for (int v = 0; v < partition.view_count(); ++v) {
        const Eigen::MatrixXd a = partition.extract_columns(v, train_inputs);
        const Eigen::MatrixXd b = partition.extract_columns(v, test_inputs);
        views.push_back(fit_discriminator(a, b, lambda_for(a, b), options.descent));
    }
    return RatioProvider(std::move(joint), std::move(views), partition, options.clip);
}

}  // namespace shiftlab
