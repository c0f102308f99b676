#include "shiftlab/selection.hpp"

#include "shiftlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace shiftlab {

namespace {

/// ln p(train | x_v) and ln p(test | x_v) from a discriminator's logit.
std::pair<double, double> log_posteriors(double logit) {
    // ln sigmoid(z) = -ln(1 + e^{-z})
    const auto log_sigmoid = [](double z) { return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z)); };
    return {log_sigmoid(-logit), log_sigmoid(logit)};
}

double log_sum_exp(const Eigen::VectorXd &v) {
    const double top = v.maxCoeff();
    return top + std::log((v.array() - top).exp().sum());
}

}  // namespace

KlCriterion kl_view_criterion(const RatioProvider &rp, const Eigen::MatrixXd &train_inputs,
                              const Eigen::MatrixXd &test_inputs, double threshold) {
    const ViewPartition &partition = rp.partition();
    if (partition.view_count() == 0 || static_cast<int>(rp.views().size()) != partition.view_count()) {
        throw ConfigError("KL criterion needs one fitted discriminator per view");
    }
    if (train_inputs.rows() == 0 || test_inputs.rows() == 0) {
        throw DataError("KL criterion needs nonempty train and test inputs");
    }
    if (train_inputs.cols() != partition.dim() || test_inputs.cols() != partition.dim()) {
        throw DataError("KL criterion inputs do not match the partition dimension");
    }
    const Eigen::Index n_tr = train_inputs.rows();
    const Eigen::Index n_te = test_inputs.rows();
    const double log_clip = std::log(rp.clip());

    KlCriterion out;
    std::vector<int> generalized;
    for (int v = 0; v < partition.view_count(); ++v) {
        const Discriminator &d = rp.view(v);
        Eigen::VectorXd log_tr(n_tr + n_te);
        Eigen::VectorXd log_te(n_tr + n_te);
        for (Eigen::Index i = 0; i < n_tr + n_te; ++i) {
            const Eigen::VectorXd x = i < n_tr ? Eigen::VectorXd(train_inputs.row(i).transpose())
                                               : Eigen::VectorXd(test_inputs.row(i - n_tr).transpose());
            std::tie(log_tr(i), log_te(i)) = log_posteriors(d.logit(partition.extract(v, x)));
        }
        log_tr.array() -= log_sum_exp(log_tr);
        log_te.array() -= log_sum_exp(log_te);
        double k = 0.0;
        for (Eigen::Index i = 0; i < n_tr + n_te; ++i) {
            const double log_ratio = std::clamp(log_tr(i) - log_te(i), -log_clip, log_clip);
            if (i < n_tr) {
                k += std::exp(log_tr(i)) * log_ratio;
            } else {
                k -= std::exp(log_te(i)) * log_ratio;
            }
        }
        // the two partial sums can undershoot zero for near-identical samples
        k = std::max(k, 0.0);
        out.divergence.push_back(k);
        if (k < threshold) {
            generalized.push_back(v);
        }
    }
    out.partition = partition.with_generalized(generalized);
    return out;
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, int k, RandomSeed seed) {
    if (k < 2) {
        throw ConfigError("cross-validation needs at least 2 folds");
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng = make_rng(seed);
    // Fisher-Yates with our own uniform draw so the order does not depend on the standard library
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
        std::swap(perm[i - 1], perm[std::min(j, i - 1)]);
    }
    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    for (std::size_t j = 0; j < n; ++j) {
        folds[j % static_cast<std::size_t>(k)].push_back(perm[j]);
    }
    for (auto &f : folds) {
        std::sort(f.begin(), f.end());
    }
    return folds;
}

LambdaSelection select_lambda(const FoldFitter &fit, const Dataset &train, const std::vector<double> &grid,
                              CvScheme scheme, const RatioProvider *ratios, RandomSeed seed, int folds) {
    if (!train.labeled()) {
        throw DataError("lambda selection needs labeled training data");
    }
    if (grid.empty()) {
        throw ConfigError("lambda grid is empty");
    }
    for (const double l : grid) {
        if (!(l >= 0.0) || !std::isfinite(l)) {
            throw ConfigError("lambda grid entries must be finite and non-negative");
        }
    }
    if (scheme == CvScheme::IWCV5 && ratios == nullptr) {
        throw ConfigError("IWCV needs a ratio provider");
    }
    const auto parts = make_folds(train.size(), folds, seed);
    for (const auto &p : parts) {
        if (p.size() < 2) {
            throw DataError("cross-validation fold has fewer than 2 samples (" + std::to_string(train.size()) +
                            " rows for " + std::to_string(folds) + " folds)");
        }
    }
    Eigen::VectorXd weight = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(train.size()));
    if (scheme == CvScheme::IWCV5) {
        for (std::size_t i = 0; i < train.size(); ++i) {
            weight(static_cast<Eigen::Index>(i)) = 1.0 / ratios->joint_ratio(train.row(i));
        }
    }

    LambdaSelection out;
    out.grid = grid;
    std::sort(out.grid.begin(), out.grid.end());
    const auto labels = train.labels();
    for (const double lambda : out.grid) {
        std::vector<double> scores;
        for (std::size_t f = 0; f < parts.size(); ++f) {
            std::vector<std::size_t> rest;
            for (std::size_t g = 0; g < parts.size(); ++g) {
                if (g != f) {
                    rest.insert(rest.end(), parts[g].begin(), parts[g].end());
                }
            }
            std::sort(rest.begin(), rest.end());
            const SampleLoss loss = fit(train.subset(rest), lambda);
            double total = 0.0;
            for (const std::size_t i : parts[f]) {
                total += weight(static_cast<Eigen::Index>(i)) * loss(train.row(i), labels[i]);
            }
            scores.push_back(total / static_cast<double>(parts[f].size()));
        }
        out.mean_loss.push_back(std::accumulate(scores.begin(), scores.end(), 0.0) /
                                static_cast<double>(scores.size()));
        out.fold_score.push_back(std::move(scores));
    }
    std::size_t best = 0;
    for (std::size_t j = 1; j < out.grid.size(); ++j) {
        if (out.mean_loss[j] <= out.mean_loss[best]) {
            best = j;
        }
    }
    out.lambda = out.grid[best];
    return out;
}

}  // namespace shiftlab
