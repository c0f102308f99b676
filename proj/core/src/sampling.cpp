#include "shiftlab/sampling.hpp"

#include "shiftlab/error.hpp"
#include "shiftlab/pca.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <tuple>

namespace shiftlab {

namespace {

double uniform_in(const Interval &iv, Rng &rng) {
    return iv.lo + (iv.hi - iv.lo) * uniform01(rng);
}

struct PortionSample {
    std::vector<std::size_t> rows;  // indices into the source
    PortionDraw draw;
};

PortionSample sample_portion(const Dataset &source, const std::vector<std::size_t> &portion, int count,
                             const BiasConfig &cfg, Rng &rng) {
    if (portion.size() < static_cast<std::size_t>(count)) {
        throw DataError("portion has " + std::to_string(portion.size()) + " rows but " + std::to_string(count) +
                        " were requested");
    }
    PortionSample out;
    out.draw.a = uniform_in(cfg.a_interval, rng);
    out.draw.b = uniform_in(cfg.b_interval, rng);

    Eigen::MatrixXd x(static_cast<Eigen::Index>(portion.size()), source.dim());
    for (std::size_t r = 0; r < portion.size(); ++r) {
        x.row(static_cast<Eigen::Index>(r)) = source.features().row(static_cast<Eigen::Index>(portion[r]));
    }
    Eigen::VectorXd log_w = Eigen::VectorXd::Zero(x.rows());
    const PcaModel pca = x.rows() >= 2 ? fit_pca(x) : PcaModel{};
    if (pca.rank() > 0) {
        out.draw.component = static_cast<int>(uniform01(rng) * pca.rank());
        const Eigen::VectorXd score = pca.project(x).col(out.draw.component);
        const double lo = score.minCoeff();
        const double hi = score.maxCoeff();
        const double mean = score.mean();
        const double sd = std::sqrt((score.array() - mean).square().sum() / static_cast<double>(score.size() - 1));
        out.draw.mu = lo + (hi - lo) / out.draw.a;
        out.draw.sigma = sd / out.draw.b;
        if (out.draw.sigma > 0.0) {
            // log of the normal density; the constant cancels in the sampler
            log_w = -0.5 * ((score.array() - out.draw.mu) / out.draw.sigma).square();
        }
    }
    const auto picked = weighted_sample_without_replacement(log_w, static_cast<std::size_t>(count), rng);
    out.rows.reserve(picked.size());
    for (const std::size_t p : picked) {
        out.rows.push_back(portion[p]);
    }
    std::sort(out.rows.begin(), out.rows.end());
    return out;
}

}  // namespace

void BiasConfig::validate() const {
    const auto check = [](const Interval &iv, const char *name) {
        if (!(iv.lo > 0.0) || !(iv.hi >= iv.lo) || !std::isfinite(iv.hi)) {
            throw ConfigError(std::string(name) + " must satisfy 0 < lo <= hi");
        }
    };
    check(a_interval, "a_interval");
    check(b_interval, "b_interval");
    if (n_train < 1 || n_test < 1) {
        throw ConfigError("n_train and n_test must be at least 1");
    }
    if (split_feature < 0) {
        throw ConfigError("split_feature must be non-negative");
    }
}

std::vector<std::size_t> weighted_sample_without_replacement(const Eigen::VectorXd &log_weights, std::size_t count,
                                                             Rng &rng) {
    const auto n = static_cast<std::size_t>(log_weights.size());
    if (count > n) {
        throw DataError("cannot draw " + std::to_string(count) + " distinct rows from " + std::to_string(n));
    }
    // Exponential-clock keys: the `count` smallest of E_i / w_i are a
    // sequential proportional draw without replacement.
    std::vector<double> key(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = 1.0 - uniform01(rng);  // (0, 1]
        const double lw = log_weights(static_cast<Eigen::Index>(i));
        key[i] = std::log(-std::log(u)) - lw;
        if (std::isnan(key[i])) {
            throw NumericError("sampling weight is NaN");
        }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
    order.resize(count);
    std::sort(order.begin(), order.end());
    return order;
}

BiasedSplit biased_sample(const Dataset &source, const BiasConfig &cfg) {
    cfg.validate();
    if (!source.labeled()) {
        throw DataError("biased sampling needs a labeled source");
    }
    if (cfg.split_feature >= source.dim()) {
        throw ConfigError("split_feature " + std::to_string(cfg.split_feature) + " is out of range for " +
                          std::to_string(source.dim()) + " features");
    }
    std::vector<std::size_t> order(source.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto column = source.features().col(cfg.split_feature);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return column(static_cast<Eigen::Index>(a)) < column(static_cast<Eigen::Index>(b));
    });
    const std::size_t lower = (order.size() + 1) / 2;
    std::vector<std::size_t> train_portion(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(lower));
    std::vector<std::size_t> test_portion(order.begin() + static_cast<std::ptrdiff_t>(lower), order.end());
    std::sort(train_portion.begin(), train_portion.end());
    std::sort(test_portion.begin(), test_portion.end());

    Rng rng = make_rng(cfg.seed);
    PortionSample test = sample_portion(source, test_portion, cfg.n_test, cfg, rng);
    PortionSample train = sample_portion(source, train_portion, cfg.n_train, cfg, rng);

    BiasedSplit out;
    out.train = source.subset(train.rows).with_tag(SourceTag::Train);
    out.test = source.subset(test.rows).with_tag(SourceTag::Test);
    out.train_rows = std::move(train.rows);
    out.test_rows = std::move(test.rows);
    out.train_draw = train.draw;
    out.test_draw = test.draw;
    return out;
}

namespace {

Eigen::Matrix2d psd_factor(const Eigen::Matrix2d &cov, const char *name) {
    if (!cov.allFinite() || std::abs(cov(0, 1) - cov(1, 0)) > 1e-12 * (1.0 + cov.cwiseAbs().maxCoeff())) {
        throw DataError(std::string(name) + " covariance is not a finite symmetric matrix");
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(cov);
    const Eigen::Vector2d values = solver.eigenvalues();
    if (values.minCoeff() < -1e-12 * (1.0 + values.cwiseAbs().maxCoeff())) {
        throw DataError(std::string(name) + " covariance is not positive semidefinite");
    }
    return solver.eigenvectors() * values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

std::pair<Dataset, std::vector<bool>> draw_points(const Eigen::Vector2d &mean, const Eigen::Matrix2d &factor, int n,
                                                  const SceneSpec &spec, SourceTag tag, Rng &rng) {
    Eigen::MatrixXd x(n, 2);
    std::vector<int> y(static_cast<std::size_t>(n));
    std::vector<bool> flipped(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double z0 = standard_normal(rng);
        const double z1 = standard_normal(rng);
        const Eigen::Vector2d point = mean + factor * Eigen::Vector2d(z0, z1);
        x.row(i) = point.transpose();
        const int clean = spec.boundary_w.dot(point) + spec.boundary_b > 0.0 ? 1 : 0;
        const bool flip = uniform01(rng) < spec.noise_rate;
        flipped[static_cast<std::size_t>(i)] = flip;
        y[static_cast<std::size_t>(i)] = flip ? 1 - clean : clean;
    }
    return {Dataset(std::move(x), std::move(y), 2, tag, {"x1", "x2"}), std::move(flipped)};
}

}  // namespace

Scene gaussian_2d_scene(const SceneSpec &spec, RandomSeed seed) {
    if (!(spec.noise_rate >= 0.0 && spec.noise_rate <= 1.0)) {
        throw ConfigError("noise_rate must lie in [0, 1]");
    }
    if (spec.n_train < 1 || spec.n_test < 1) {
        throw ConfigError("scene sample counts must be at least 1");
    }
    const Eigen::Matrix2d train_factor = psd_factor(spec.train_cov, "training");
    const Eigen::Matrix2d test_factor = psd_factor(spec.test_cov, "test");
    Rng rng = make_rng(seed);
    Scene scene;
    std::tie(scene.train, scene.train_flipped) =
        draw_points(spec.train_mean, train_factor, spec.n_train, spec, SourceTag::Train, rng);
    std::tie(scene.test, scene.test_flipped) =
        draw_points(spec.test_mean, test_factor, spec.n_test, spec, SourceTag::Test, rng);
    return scene;
}

std::vector<GridPoint> emit_grid(const std::function<Eigen::VectorXd(const Eigen::VectorXd &)> &proba, int input_dim,
                                 const GridBounds &bounds, int resolution) {
    if (input_dim != 2) {
        throw DataError("grid output needs a model over exactly 2 inputs, got " + std::to_string(input_dim));
    }
    if (resolution < 2) {
        throw ConfigError("grid resolution must be at least 2");
    }
    if (!(bounds.max.array() >= bounds.min.array()).all()) {
        throw ConfigError("grid bounds have max < min");
    }
    std::vector<GridPoint> grid;
    grid.reserve(static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution));
    const double denom = static_cast<double>(resolution - 1);
    for (int i = 0; i < resolution; ++i) {
        const double x1 = bounds.min(0) + (bounds.max(0) - bounds.min(0)) * static_cast<double>(i) / denom;
        for (int j = 0; j < resolution; ++j) {
            const double x2 = bounds.min(1) + (bounds.max(1) - bounds.min(1)) * static_cast<double>(j) / denom;
            const Eigen::VectorXd p = proba(Eigen::Vector2d(x1, x2));
            if (p.size() < 2) {
                throw DataError("grid model returned fewer than 2 class probabilities");
            }
            grid.push_back({x1, x2, p(1)});
        }
    }
    return grid;
}

void write_grid_csv(const std::vector<GridPoint> &grid, const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open " + path.string() + " for writing");
    }
    const auto put = [&out](double v) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        out.write(buf, res.ptr - buf);
    };
    out << "x1,x2,p_class1\n";
    for (const GridPoint &g : grid) {
        put(g.x1);
        out << ',';
        put(g.x2);
        out << ',';
        put(g.p_class1);
        out << '\n';
    }
    if (!out) {
        throw DataError("failed writing " + path.string());
    }
}

}  // namespace shiftlab
