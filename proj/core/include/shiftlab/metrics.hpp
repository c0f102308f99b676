#pragma once

#include "shiftlab/dataset.hpp"
#include "shiftlab/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>

namespace shiftlab {

template <class P>
concept ProbabilisticPredictor = requires(const P &p, const Eigen::VectorXd &x) {
    { p.predict_proba(x) } -> std::convertible_to<Eigen::VectorXd>;
};

template <class P>
concept LabelPredictor = requires(const P &p, const Eigen::VectorXd &x) {
    { p.predict_label(x) } -> std::convertible_to<int>;
};

/// Mean of -ln p(y_i | x_i) (natural log). Probabilities are floored at the
/// smallest normal double so a saturated wrong prediction stays finite.
template <ProbabilisticPredictor P>
double logloss(const P &predictor, const Dataset &data) {
    if (data.size() == 0) {
        throw DataError("logloss of an empty dataset");
    }
    const auto labels = data.labels();
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Eigen::VectorXd p = predictor.predict_proba(data.row(i));
        total -= std::log(std::max(p(labels[i]), std::numeric_limits<double>::min()));
    }
    return total / static_cast<double>(data.size());
}

template <LabelPredictor P>
double accuracy(const P &predictor, const Dataset &data) {
    if (data.size() == 0) {
        throw DataError("accuracy of an empty dataset");
    }
    const auto labels = data.labels();
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        hits += predictor.predict_label(data.row(i)) == labels[i] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

/// Index of the largest entry; ties go to the lowest index.
inline int argmax_lowest(const Eigen::Ref<const Eigen::VectorXd> &v) {
    int best = 0;
    for (Eigen::Index k = 1; k < v.size(); ++k) {
        if (v(k) > v(best)) {
            best = static_cast<int>(k);
        }
    }
    return best;
}

/// Numerically stable softmax.
inline Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd> &scores) {
    const double top = scores.maxCoeff();
    Eigen::VectorXd e = (scores.array() - top).exp();
    return e / e.sum();
}

}  // namespace shiftlab
