#include "shiftlab/error.hpp"
#include "shiftlab/pca.hpp"
#include "shiftlab/sampling.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

using namespace shiftlab;
using shiftlab::testing::labeled_random;
using shiftlab::testing::temp_dir;

namespace {

// 400 rows, 3 features, distinct values in column 0
Dataset source_data() {
    Rng rng(101);
    Dataset d = labeled_random(400, 3, 2, rng);
    Eigen::MatrixXd x = d.features();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        x(i, 0) = static_cast<double>((i * 37) % 400) / 400.0;
    }
    return d.with_features(x);
}

std::vector<std::size_t> upper_half(const Dataset &d, int feature) {
    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return d.features()(static_cast<Eigen::Index>(a), feature) < d.features()(static_cast<Eigen::Index>(b), feature);
    });
    std::vector<std::size_t> upper(order.begin() + static_cast<std::ptrdiff_t>((order.size() + 1) / 2), order.end());
    std::sort(upper.begin(), upper.end());
    return upper;
}

}  // namespace

TEST_CASE("biased_sample structure") {
    const Dataset src = source_data();
    BiasConfig cfg;
    cfg.n_train = 60;
    cfg.n_test = 80;
    for (std::uint64_t s = 0; s < 20; ++s) {
        cfg.seed = RandomSeed{s};
        const BiasedSplit split = biased_sample(src, cfg);
        CHECK(split.train.size() == 60);
        CHECK(split.test.size() == 80);
        CHECK(std::set<std::size_t>(split.train_rows.begin(), split.train_rows.end()).size() == 60);
        CHECK(std::set<std::size_t>(split.test_rows.begin(), split.test_rows.end()).size() == 80);
        CHECK(std::is_sorted(split.train_rows.begin(), split.train_rows.end()));
        for (std::size_t i = 0; i < split.train.size(); ++i) {
            const std::size_t r = split.train_rows[i];
            CHECK(split.train.row(i) == src.row(r));
            CHECK(split.train.label(i) == src.label(r));
            CHECK(src.features()(static_cast<Eigen::Index>(r), 0) < 0.5);
        }
        for (std::size_t i = 0; i < split.test.size(); ++i) {
            CHECK(split.test.row(i) == src.row(split.test_rows[i]));
            CHECK(src.features()(static_cast<Eigen::Index>(split.test_rows[i]), 0) >= 0.5);
        }
        CHECK(split.train.tag() == SourceTag::Train);
        CHECK(split.test.tag() == SourceTag::Test);
        for (const PortionDraw &d : {split.train_draw, split.test_draw}) {
            CHECK(d.a >= 1.0);
            CHECK(d.a <= 5.0);
            CHECK(d.b >= 1.0);
            CHECK(d.b <= 5.0);
            CHECK(d.component >= 0);
            CHECK(d.component < 3);
        }
    }
}

TEST_CASE("biased_sample is deterministic per seed") {
    const Dataset src = source_data();
    BiasConfig cfg;
    cfg.seed = RandomSeed{42};
    const BiasedSplit a = biased_sample(src, cfg);
    const BiasedSplit b = biased_sample(src, cfg);
    CHECK(a.train_rows == b.train_rows);
    CHECK(a.test_rows == b.test_rows);
    cfg.seed = RandomSeed{43};
    CHECK(biased_sample(src, cfg).test_rows != a.test_rows);
}

TEST_CASE("a = 1 concentrates the test sample at high projections") {
    const Dataset src = source_data();
    const std::vector<std::size_t> portion = upper_half(src, 0);
    Eigen::MatrixXd px(static_cast<Eigen::Index>(portion.size()), src.dim());
    for (std::size_t r = 0; r < portion.size(); ++r) {
        px.row(static_cast<Eigen::Index>(r)) = src.row(portion[r]).transpose();
    }
    const PcaModel pca = fit_pca(px);
    const Eigen::MatrixXd scores = pca.project(px);

    BiasConfig cfg;
    cfg.a_interval = {1.0, 1.0};
    int above = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        cfg.seed = RandomSeed{1000 + s};
        const BiasedSplit split = biased_sample(src, cfg);
        CHECK(split.test_draw.a == 1.0);
        const Eigen::VectorXd col = scores.col(split.test_draw.component);
        CHECK(split.test_draw.mu == doctest::Approx(col.maxCoeff()));
        double sample_mean = 0.0;
        for (const std::size_t r : split.test_rows) {
            const auto at = std::lower_bound(portion.begin(), portion.end(), r) - portion.begin();
            sample_mean += col(at) / static_cast<double>(split.test_rows.size());
        }
        above += sample_mean > col.mean() ? 1 : 0;
    }
    CHECK(above == 100);
}

TEST_CASE("tiny b leaves the portion marginals unchanged") {
    const Dataset src = source_data();
    const std::vector<std::size_t> portion = upper_half(src, 0);
    double portion_mean = 0.0;
    for (const std::size_t r : portion) {
        portion_mean += src.features()(static_cast<Eigen::Index>(r), 1) / static_cast<double>(portion.size());
    }
    BiasConfig cfg;
    cfg.b_interval = {1e-9, 1e-9};
    cfg.n_test = 50;
    double grand = 0.0;
    const int reps = 400;
    for (int s = 0; s < reps; ++s) {
        cfg.seed = RandomSeed{static_cast<std::uint64_t>(s)};
        const BiasedSplit split = biased_sample(src, cfg);
        grand += split.test.features().col(1).mean() / reps;
    }
    // sd of a uniform column is ~0.29; the mean of 400 means of 50 (finite population) has sd < 0.003
    CHECK(std::abs(grand - portion_mean) < 0.01);
}

TEST_CASE("biased_sample errors") {
    const Dataset src = source_data();
    BiasConfig cfg;
    cfg.n_test = 201;
    CHECK_THROWS_AS((void)biased_sample(src, cfg), DataError);
    cfg.n_test = 10;
    cfg.split_feature = 3;
    CHECK_THROWS_AS((void)biased_sample(src, cfg), ConfigError);
    cfg.split_feature = 0;
    cfg.a_interval = {0.0, 1.0};
    CHECK_THROWS_AS((void)biased_sample(src, cfg), ConfigError);
    cfg.a_interval = {2.0, 1.0};
    CHECK_THROWS_AS((void)biased_sample(src, cfg), ConfigError);
    cfg.a_interval = {1.0, 5.0};
    cfg.n_train = 0;
    CHECK_THROWS_AS((void)biased_sample(src, cfg), ConfigError);
    cfg.n_train = 10;
    CHECK_THROWS_AS((void)biased_sample(src.without_labels(), cfg), DataError);
}

TEST_CASE("weighted_sample_without_replacement") {
    Rng rng(7);
    const auto all = weighted_sample_without_replacement(Eigen::VectorXd::Zero(5), 5, rng);
    CHECK(all == std::vector<std::size_t>{0, 1, 2, 3, 4});
    CHECK_THROWS_AS((void)weighted_sample_without_replacement(Eigen::VectorXd::Zero(3), 4, rng), DataError);

    // first pick frequencies follow the weights
    Eigen::VectorXd logw(3);
    logw << std::log(1.0), std::log(2.0), std::log(7.0);
    std::vector<int> hits(3, 0);
    const int n = 20000;
    for (int t = 0; t < n; ++t) {
        const auto one = weighted_sample_without_replacement(logw, 1, rng);
        ++hits[one[0]];
    }
    CHECK(hits[0] / static_cast<double>(n) == doctest::Approx(0.1).epsilon(0.1));
    CHECK(hits[1] / static_cast<double>(n) == doctest::Approx(0.2).epsilon(0.07));
    CHECK(hits[2] / static_cast<double>(n) == doctest::Approx(0.7).epsilon(0.02));

    // a -inf weight is never drawn while others remain
    logw(0) = -HUGE_VAL;
    for (int t = 0; t < 200; ++t) {
        CHECK(weighted_sample_without_replacement(logw, 2, rng) == std::vector<std::size_t>{1, 2});
    }
}

TEST_CASE("gaussian_2d_scene labels and noise") {
    SceneSpec spec;
    spec.boundary_w = {0.3, -1.0};
    spec.boundary_b = 0.2;
    spec.noise_rate = 0.0;
    const Scene clean = gaussian_2d_scene(spec, RandomSeed{1});
    CHECK(clean.train.size() == 50);
    CHECK(clean.test.size() == 100);
    for (const Dataset *d : {&clean.train, &clean.test}) {
        for (std::size_t i = 0; i < d->size(); ++i) {
            const int expected = spec.boundary_w.dot(d->row(i)) + spec.boundary_b > 0.0 ? 1 : 0;
            CHECK(d->label(i) == expected);
        }
    }

    spec.noise_rate = 1.0;
    const Scene flipped = gaussian_2d_scene(spec, RandomSeed{1});
    CHECK(flipped.train.features() == clean.train.features());
    for (std::size_t i = 0; i < flipped.test.size(); ++i) {
        CHECK(flipped.test.label(i) == 1 - clean.test.label(i));
        CHECK(flipped.test_flipped[i]);
    }

    // flips over 150 points are Binomial(150, 0.1): mean 15, variance 13.5
    spec.noise_rate = 0.1;
    const int reps = 400;
    double sum = 0.0;
    double sq = 0.0;
    for (int s = 0; s < reps; ++s) {
        const Scene sc = gaussian_2d_scene(spec, RandomSeed{static_cast<std::uint64_t>(500 + s)});
        const double flips = static_cast<double>(std::count(sc.train_flipped.begin(), sc.train_flipped.end(), true) +
                                                 std::count(sc.test_flipped.begin(), sc.test_flipped.end(), true));
        sum += flips;
        sq += flips * flips;
    }
    const double mean = sum / reps;
    const double var = (sq - reps * mean * mean) / (reps - 1);
    CHECK(std::abs(mean - 15.0) < 4.0 * std::sqrt(13.5 / reps));
    CHECK(var == doctest::Approx(13.5).epsilon(0.25));
}

TEST_CASE("gaussian_2d_scene moments and errors") {
    SceneSpec spec;
    spec.train_mean = {1.0, -2.0};
    spec.train_cov << 2.0, 0.6, 0.6, 0.5;
    spec.n_train = 20000;
    const Scene s = gaussian_2d_scene(spec, RandomSeed{9});
    const Eigen::MatrixXd &x = s.train.features();
    const Eigen::RowVector2d mean = x.colwise().mean();
    CHECK(mean(0) == doctest::Approx(1.0).epsilon(0.03));
    CHECK(mean(1) == doctest::Approx(-2.0).epsilon(0.01));
    const Eigen::MatrixXd centered = x.rowwise() - mean;
    const Eigen::Matrix2d cov = centered.transpose() * centered / (x.rows() - 1.0);
    CHECK((cov - spec.train_cov).cwiseAbs().maxCoeff() < 0.06);

    SceneSpec bad;
    bad.test_cov << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS((void)gaussian_2d_scene(bad, RandomSeed{1}), DataError);
    bad = SceneSpec{};
    bad.noise_rate = 1.5;
    CHECK_THROWS_AS((void)gaussian_2d_scene(bad, RandomSeed{1}), ConfigError);
    bad.noise_rate = 0.1;
    bad.train_cov << 1.0, 0.0, 0.0, 0.0;  // singular is allowed
    CHECK_NOTHROW((void)gaussian_2d_scene(bad, RandomSeed{1}));
}

TEST_CASE("emit_grid lattice") {
    const auto constant = [](const Eigen::VectorXd &) { return Eigen::Vector3d::Constant(1.0 / 3.0).eval(); };
    const auto grid = emit_grid([&](const Eigen::VectorXd &x) -> Eigen::VectorXd { return constant(x); }, 2, {}, 3);
    REQUIRE(grid.size() == 9);
    const double pts[3] = {0.0, 0.5, 1.0};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const GridPoint &g = grid[static_cast<std::size_t>(3 * i + j)];
            CHECK(g.x1 == pts[i]);
            CHECK(g.x2 == pts[j]);
            CHECK(g.p_class1 == doctest::Approx(1.0 / 3.0));
        }
    }
    const auto identity = [](const Eigen::VectorXd &x) -> Eigen::VectorXd { return Eigen::Vector2d(1.0 - x(0), x(0)); };
    CHECK_THROWS_AS((void)emit_grid(identity, 3, {}, 3), DataError);
    CHECK_THROWS_AS((void)emit_grid(identity, 2, {}, 1), ConfigError);

    const std::filesystem::path path = temp_dir() / "grid.csv";
    write_grid_csv(emit_grid(identity, 2, {{-1.0, 0.0}, {1.0, 2.0}}, 2), path);
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == "x1,x2,p_class1\n-1,0,-1\n-1,2,-1\n1,0,1\n1,2,1\n");
}
