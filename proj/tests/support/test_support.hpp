#pragma once

#include "shiftlab/dataset.hpp"
#include "shiftlab/random.hpp"
#include "shiftlab/sampling.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

namespace shiftlab::testing {

inline std::filesystem::path temp_dir() {
    const std::filesystem::path dir(SHIFTLAB_TEST_TMP);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Location of an external dataset, or nullopt when it is not installed.
inline std::optional<std::filesystem::path> data_file(const std::string &name) {
    const char *env = std::getenv("SHIFTLAB_DATA_DIR");
    if (env == nullptr || *env == '\0') {
        return std::nullopt;
    }
    const std::filesystem::path p = std::filesystem::path(env) / name;
    if (!std::filesystem::exists(p)) {
        return std::nullopt;
    }
    return p;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng &rng, double lo = 0.0,
                                     double hi = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            m(i, j) = lo + (hi - lo) * uniform01(rng);
        }
    }
    return m;
}

/// Two Gaussian blobs in d dimensions, class y centered at (+-sep/2, 0, ...).
inline Dataset gaussian_blobs(int n, int d, double sep, Rng &rng, int classes = 2) {
    Eigen::MatrixXd x(n, d);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int label = i % classes;
        y[static_cast<std::size_t>(i)] = label;
        for (int j = 0; j < d; ++j) {
            x(i, j) = standard_normal(rng);
        }
        x(i, 0) += sep * (static_cast<double>(label) - 0.5 * (classes - 1));
    }
    return {x, y, classes};
}

inline Dataset labeled_random(int n, int d, int classes, Rng &rng) {
    Eigen::MatrixXd x = random_matrix(n, d, rng);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        y[static_cast<std::size_t>(i)] = static_cast<int>(uniform01(rng) * classes);
    }
    return {x, y, classes};
}

/// Two-Gaussian covariate-shift scene: a narrow training cloud far left on
/// x1, a wider test cloud, and a nearly horizontal boundary, so x2 carries the
/// label and its marginal barely moves between the samples.
inline SceneSpec shifted_scene_spec() {
    SceneSpec spec;
    spec.train_mean = {-2.293, 0.0};
    spec.train_cov << 0.163 * 0.163, 0.0, 0.0, 1.164 * 1.164;
    spec.test_mean = {0.0, 0.0};
    spec.test_cov << 1.346 * 1.346, 0.0, 0.0, 1.279 * 1.279;
    spec.boundary_w = {-0.026, 1.0};
    spec.boundary_b = 0.104;
    spec.noise_rate = 0.1;
    spec.n_train = 50;
    spec.n_test = 100;
    return spec;
}

/// One regularization weight shared by all four methods on that scene.
inline double shifted_scene_lambda() { return 1.0 / 8192.0; }

inline std::uint64_t shifted_scene_master_seed() { return 31; }

}  // namespace shiftlab::testing
