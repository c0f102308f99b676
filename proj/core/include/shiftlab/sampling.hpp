#pragma once

#include "shiftlab/dataset.hpp"
#include "shiftlab/random.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <functional>
#include <utility>
#include <vector>

namespace shiftlab {

struct Interval {
    double lo = 1.0;
    double hi = 5.0;
};

struct BiasConfig {
    int split_feature = 0;
    Interval a_interval{1.0, 5.0};
    Interval b_interval{1.0, 5.0};
    int n_train = 100;
    int n_test = 100;
    RandomSeed seed{};

    /// Throws ConfigError on an empty interval, a non-positive lower bound or a count < 1.
    void validate() const;
};

/// The random quantities drawn for one portion, kept for auditing.
struct PortionDraw {
    double a = 0.0;
    double b = 0.0;
    int component = 0;
    double mu = 0.0;
    double sigma = 0.0;
};

struct BiasedSplit {
    Dataset train;
    Dataset test;
    std::vector<std::size_t> train_rows;  ///< source row ids, ascending
    std::vector<std::size_t> test_rows;
    PortionDraw train_draw;
    PortionDraw test_draw;
};

/// Splits `source` at the median of `split_feature` (lower half feeds the
/// training sample), then inside each portion weights rows by a Gaussian
/// density over one random principal-component score and draws the requested
/// count without replacement. The test sample is drawn first.
BiasedSplit biased_sample(const Dataset &source, const BiasConfig &cfg);

/// Draws `count` distinct indices with probability proportional to
/// exp(log_weights), sequentially without replacement. Returned ascending.
std::vector<std::size_t> weighted_sample_without_replacement(const Eigen::VectorXd &log_weights, std::size_t count,
                                                             Rng &rng);

/// Two Gaussian input distributions (train inside / offset from test) sharing
/// one linear labeling rule: y = 1 when boundary_w . x + boundary_b > 0.
struct SceneSpec {
    Eigen::Vector2d train_mean{0.0, 0.0};
    Eigen::Matrix2d train_cov = Eigen::Matrix2d::Identity();
    Eigen::Vector2d test_mean{0.0, 0.0};
    Eigen::Matrix2d test_cov = Eigen::Matrix2d::Identity();
    Eigen::Vector2d boundary_w{1.0, 1.0};
    double boundary_b = 0.0;
    double noise_rate = 0.1;
    int n_train = 50;
    int n_test = 100;
};

struct Scene {
    Dataset train;
    Dataset test;
    std::vector<bool> train_flipped;
    std::vector<bool> test_flipped;
};

/// Samples both sets and flips each label independently with probability
/// noise_rate. Throws DataError when a covariance is not positive semidefinite.
Scene gaussian_2d_scene(const SceneSpec &spec, RandomSeed seed);

struct GridBounds {
    Eigen::Vector2d min{0.0, 0.0};
    Eigen::Vector2d max{1.0, 1.0};
};

struct GridPoint {
    double x1 = 0.0;
    double x2 = 0.0;
    double p_class1 = 0.0;
};

/// Evaluates `proba` on a resolution x resolution lattice; x1 varies slowest.
std::vector<GridPoint> emit_grid(const std::function<Eigen::VectorXd(const Eigen::VectorXd &)> &proba, int input_dim,
                                 const GridBounds &bounds, int resolution);

void write_grid_csv(const std::vector<GridPoint> &grid, const std::filesystem::path &path);

}  // namespace shiftlab
