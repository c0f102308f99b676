#include "shiftlab/baselines.hpp"

#include "shiftlab/error.hpp"
#include "shiftlab/metrics.hpp"

#include <cmath>

namespace shiftlab {

namespace {

Eigen::MatrixXd design_matrix(const Dataset &data) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(data.size()), data.dim() + 1);
    x.col(0).setOnes();
    x.rightCols(data.dim()) = data.features();
    return x;
}

Eigen::VectorXd resolve_weights(const Dataset &train, const std::optional<Eigen::VectorXd> &weights, bool allow_zero) {
    if (!weights) {
        return Eigen::VectorXd::Ones(static_cast<Eigen::Index>(train.size()));
    }
    if (weights->size() != static_cast<Eigen::Index>(train.size())) {
        throw DataError("sample weight vector length does not match the training set");
    }
    for (Eigen::Index i = 0; i < weights->size(); ++i) {
        const double w = (*weights)(i);
        if (!std::isfinite(w) || w < 0.0 || (!allow_zero && w == 0.0)) {
            throw DataError("sample weight " + std::to_string(w) + " at row " + std::to_string(i + 1) +
                            (allow_zero ? " is negative or non-finite" : " is not positive"));
        }
    }
    return *weights;
}

void check_training_set(const Dataset &train) {
    if (!train.labeled()) {
        throw DataError("baseline training needs labeled data");
    }
    if (train.size() == 0) {
        throw DataError("training set is empty");
    }
}

// flat parameter layout is row-major over the K x (d+1) weight matrix
Eigen::MatrixXd unflatten(const Eigen::VectorXd &flat, int k, Eigen::Index cols) {
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(flat.data(), k, cols);
}

Eigen::VectorXd flatten(const Eigen::MatrixXd &w) {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major = w;
    return Eigen::Map<const Eigen::VectorXd>(row_major.data(), row_major.size());
}

double lr_value(const Eigen::MatrixXd &design, std::span<const int> labels, const Eigen::VectorXd &sample_w,
                const Eigen::MatrixXd &w, double lambda, Eigen::MatrixXd *grad) {
    const Eigen::MatrixXd scores = design * w.transpose();  // m x K
    if (grad) {
        grad->setZero(w.rows(), w.cols());
    }
    double total = 0.0;
    Eigen::MatrixXd residual(scores.rows(), scores.cols());
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        const double top = scores.row(i).maxCoeff();
        const double lse = top + std::log((scores.row(i).array() - top).exp().sum());
        const int yi = labels[static_cast<std::size_t>(i)];
        total += sample_w(i) * (lse - scores(i, yi));
        residual.row(i) = sample_w(i) * (scores.row(i).array() - lse).exp();
        residual(i, yi) -= sample_w(i);
    }
    const double inv_m = 1.0 / static_cast<double>(scores.rows());
    if (grad) {
        *grad = inv_m * residual.transpose() * design + 2.0 * lambda * w;
    }
    return total * inv_m + lambda * w.squaredNorm();
}

double hinge_value(const Eigen::MatrixXd &design, std::span<const int> labels, const Eigen::VectorXd &sample_w,
                   const Eigen::MatrixXd &w, double lambda, Eigen::MatrixXd *subgrad) {
    const Eigen::MatrixXd scores = design * w.transpose();
    if (subgrad) {
        subgrad->setZero(w.rows(), w.cols());
    }
    double total = 0.0;
    const double inv_m = 1.0 / static_cast<double>(scores.rows());
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        const int yi = labels[static_cast<std::size_t>(i)];
        int worst = yi;
        double worst_value = 0.0;
        for (Eigen::Index y = 0; y < scores.cols(); ++y) {
            if (y == yi) {
                continue;
            }
            const double v = 1.0 + scores(i, y) - scores(i, yi);
            if (v > worst_value) {
                worst_value = v;
                worst = static_cast<int>(y);
            }
        }
        total += sample_w(i) * worst_value;
        if (subgrad && worst != yi && sample_w(i) != 0.0) {
            subgrad->row(worst) += inv_m * sample_w(i) * design.row(i);
            subgrad->row(yi) -= inv_m * sample_w(i) * design.row(i);
        }
    }
    if (subgrad) {
        *subgrad += 2.0 * lambda * w;
    }
    return total * inv_m + lambda * w.squaredNorm();
}

}  // namespace

std::string to_string(LinearKind kind) {
    switch (kind) {
    case LinearKind::LR:
        return "lr";
    case LinearKind::IWLR:
        return "iw-lr";
    case LinearKind::SVM:
        return "svm";
    case LinearKind::IWSVM:
        return "iw-svm";
    }
    return "lr";
}

Eigen::VectorXd LinearClassifier::scores(const Eigen::VectorXd &x) const {
    if (x.size() + 1 != weights.cols()) {
        throw DataError("input has " + std::to_string(x.size()) + " features, classifier expects " +
                        std::to_string(weights.cols() - 1));
    }
    return weights.col(0) + weights.rightCols(x.size()) * x;
}

int LinearClassifier::predict_label(const Eigen::VectorXd &x) const {
    return argmax_lowest(scores(x));
}

Eigen::VectorXd LinearClassifier::predict_proba(const Eigen::VectorXd &x) const {
    return softmax(scores(x));
}

LinearClassifier fit_lr(const Dataset &train, double lambda, const std::optional<Eigen::VectorXd> &weights,
                        const DescentOptions &options) {
    check_training_set(train);
    const Eigen::VectorXd sample_w = resolve_weights(train, weights, false);
    const Eigen::MatrixXd design = design_matrix(train);
    const int k = train.class_count();
    const auto labels = train.labels();
    const Eigen::Index cols = design.cols();

    const SmoothObjective objective = [&](const Eigen::VectorXd &flat, Eigen::VectorXd &grad) {
        Eigen::MatrixXd g;
        const double f = lr_value(design, labels, sample_w, unflatten(flat, k, cols), lambda, &g);
        grad = flatten(g);
        return f;
    };
    const DescentResult fit = minimize(objective, Eigen::VectorXd::Zero(k * cols), options);
    return LinearClassifier{unflatten(fit.x, k, cols), weights ? LinearKind::IWLR : LinearKind::LR, lambda};
}

double lr_objective(const LinearClassifier &model, const Dataset &train, const std::optional<Eigen::VectorXd> &weights) {
    check_training_set(train);
    return lr_value(design_matrix(train), train.labels(), resolve_weights(train, weights, false), model.weights,
                    model.lambda, nullptr);
}

LinearClassifier fit_svm(const Dataset &train, double lambda, const std::optional<Eigen::VectorXd> &weights,
                         const SubgradientOptions &options, SvmReport *report) {
    check_training_set(train);
    const Eigen::VectorXd sample_w = resolve_weights(train, weights, true);
    const Eigen::MatrixXd design = design_matrix(train);
    const int k = train.class_count();
    const auto labels = train.labels();
    const Eigen::Index cols = design.cols();

    const NonsmoothObjective objective = [&](const Eigen::VectorXd &flat, Eigen::VectorXd &g) {
        Eigen::MatrixXd sub;
        const double f = hinge_value(design, labels, sample_w, unflatten(flat, k, cols), lambda, &sub);
        g = flatten(sub);
        return f;
    };
    SubgradientResult fit = subgradient_descent(objective, Eigen::VectorXd::Zero(k * cols), options, lambda);
    if (report) {
        report->objective_trace = std::move(fit.objective_trace);
    }
    return LinearClassifier{unflatten(fit.averaged, k, cols), weights ? LinearKind::IWSVM : LinearKind::SVM, lambda};
}

double svm_objective(const LinearClassifier &model, const Dataset &train, const std::optional<Eigen::VectorXd> &weights) {
    check_training_set(train);
    return hinge_value(design_matrix(train), train.labels(), resolve_weights(train, weights, true), model.weights,
                       model.lambda, nullptr);
}

}  // namespace shiftlab
