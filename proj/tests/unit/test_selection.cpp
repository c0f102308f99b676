#include "shiftlab/baselines.hpp"
#include "shiftlab/error.hpp"
#include "shiftlab/metrics.hpp"
#include "shiftlab/selection.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

using namespace shiftlab;
using shiftlab::testing::gaussian_blobs;
using shiftlab::testing::labeled_random;
using shiftlab::testing::random_matrix;

namespace {

FoldFitter lr_fitter() {
    return [](const Dataset &fold, double lambda) -> SampleLoss {
        const LinearClassifier model = fit_lr(fold, lambda);
        return [model](const Eigen::VectorXd &x, int y) { return -std::log(model.predict_proba(x)(y)); };
    };
}

// Direct evaluation of the symmetric KL sum with posteriors in linear space.
double kl_oracle(const Discriminator &d, const Eigen::MatrixXd &train, const Eigen::MatrixXd &test, double rho) {
    const Eigen::Index n = train.rows() + test.rows();
    Eigen::VectorXd p_tr(n);
    Eigen::VectorXd p_te(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd x = i < train.rows() ? Eigen::VectorXd(train.row(i).transpose())
                                                   : Eigen::VectorXd(test.row(i - train.rows()).transpose());
        const double q = 1.0 / (1.0 + std::exp(-d.logit(x)));  // p(test | x)
        p_tr(i) = 1.0 - q;
        p_te(i) = q;
    }
    p_tr /= p_tr.sum();
    p_te /= p_te.sum();
    double k = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double r = std::clamp(p_tr(i) / p_te(i), 1.0 / rho, rho);
        k += i < train.rows() ? p_tr(i) * std::log(r) : -p_te(i) * std::log(r);
    }
    return std::max(k, 0.0);
}

}  // namespace

TEST_CASE("make_folds") {
    const auto folds = make_folds(23, 5, RandomSeed{4});
    REQUIRE(folds.size() == 5);
    std::set<std::size_t> seen;
    for (const auto &f : folds) {
        CHECK((f.size() == 4 || f.size() == 5));
        seen.insert(f.begin(), f.end());
        CHECK(std::is_sorted(f.begin(), f.end()));
    }
    CHECK(seen.size() == 23);
    CHECK(*seen.rbegin() == 22);
    CHECK(make_folds(23, 5, RandomSeed{4}) == folds);
    CHECK(make_folds(23, 5, RandomSeed{5}) != folds);
    CHECK_THROWS_AS((void)make_folds(10, 1, RandomSeed{}), ConfigError);
}

TEST_CASE("select_lambda tie rule and grid order") {
    Rng rng(3);
    const Dataset data = labeled_random(20, 2, 2, rng);
    const FoldFitter flat = [](const Dataset &, double) -> SampleLoss {
        return [](const Eigen::VectorXd &, int) { return 0.7; };
    };
    const LambdaSelection s = select_lambda(flat, data, {0.25, 1.0 / 16.0, 1.0}, CvScheme::CV5, nullptr, RandomSeed{1});
    CHECK(s.lambda == 1.0);
    CHECK(s.grid == std::vector<double>{1.0 / 16.0, 0.25, 1.0});

    // loss grows with lambda: the smallest entry wins
    const FoldFitter rising = [](const Dataset &, double lambda) -> SampleLoss {
        return [lambda](const Eigen::VectorXd &, int) { return lambda; };
    };
    CHECK(select_lambda(rising, data, default_lambda_grid(), CvScheme::CV5, nullptr, RandomSeed{1}).lambda ==
          1.0 / 65536.0);
}

TEST_CASE("IWCV with unit ratios equals CV") {
    Rng rng(5);
    const Dataset data = gaussian_blobs(40, 2, 1.0, rng);
    const RatioProvider unit = RatioProvider::constant(ViewPartition::single(2), 1.0);
    const LambdaSelection cv = select_lambda(lr_fitter(), data, default_lambda_grid(), CvScheme::CV5, nullptr, RandomSeed{8});
    const LambdaSelection iw = select_lambda(lr_fitter(), data, default_lambda_grid(), CvScheme::IWCV5, &unit, RandomSeed{8});
    CHECK(cv.fold_score == iw.fold_score);
    CHECK(cv.lambda == iw.lambda);
    REQUIRE(cv.fold_score.size() == 5);
    CHECK(cv.fold_score[0].size() == 5);
}

TEST_CASE("IWCV scales held-out losses by the test weight") {
    Rng rng(7);
    const Dataset data = labeled_random(25, 1, 2, rng);
    const RatioProvider half = RatioProvider::constant(ViewPartition::single(1), 0.5);
    const FoldFitter one = [](const Dataset &, double) -> SampleLoss {
        return [](const Eigen::VectorXd &, int) { return 1.0; };
    };
    const LambdaSelection s = select_lambda(one, data, {1.0}, CvScheme::IWCV5, &half, RandomSeed{2});
    CHECK(s.mean_loss[0] == doctest::Approx(2.0));
}

TEST_CASE("select_lambda errors") {
    Rng rng(9);
    const Dataset data = labeled_random(9, 2, 2, rng);
    CHECK_THROWS_AS((void)select_lambda(lr_fitter(), data, default_lambda_grid(), CvScheme::CV5, nullptr, RandomSeed{}),
                    DataError);
    const Dataset enough = labeled_random(10, 2, 2, rng);
    CHECK_THROWS_AS((void)select_lambda(lr_fitter(), enough, {}, CvScheme::CV5, nullptr, RandomSeed{}), ConfigError);
    CHECK_THROWS_AS((void)select_lambda(lr_fitter(), enough, {-1.0}, CvScheme::CV5, nullptr, RandomSeed{}), ConfigError);
    CHECK_THROWS_AS((void)select_lambda(lr_fitter(), enough, {1.0}, CvScheme::IWCV5, nullptr, RandomSeed{}), ConfigError);
    CHECK_THROWS_AS((void)select_lambda(lr_fitter(), enough.without_labels(), {1.0}, CvScheme::CV5, nullptr, RandomSeed{}),
                    DataError);
}

TEST_CASE("kl_view_criterion identical samples") {
    Rng rng(11);
    const Eigen::MatrixXd x = random_matrix(60, 3, rng);
    const ViewPartition part = ViewPartition::per_feature(3);
    const RatioProvider rp = fit_ratio_provider(x, x, part);
    const KlCriterion kl = kl_view_criterion(rp, x, x);
    for (const double k : kl.divergence) {
        CHECK(k < 1e-10);
    }
    CHECK(kl.partition.generalized() == std::vector<int>{0, 1, 2});
}

TEST_CASE("kl_view_criterion saturates on disjoint supports") {
    Rng rng(13);
    const Eigen::MatrixXd train = random_matrix(30, 1, rng, -2.0, -1.0);
    const Eigen::MatrixXd test = random_matrix(40, 1, rng, 1.0, 2.0);
    Discriminator sharp = Discriminator::constant(1, 30.0 / 40.0);
    sharp.weights(1) = 200.0;  // logit of "test" grows with x
    const ViewPartition part = ViewPartition::single(1);
    const double rho = 100.0;
    const RatioProvider rp(sharp, {sharp}, part, rho);
    const KlCriterion kl = kl_view_criterion(rp, train, test);
    CHECK(kl.divergence[0] == doctest::Approx(2.0 * std::log(rho)).epsilon(1e-9));
    CHECK(kl.partition.generalized().empty());
    CHECK(kl.divergence[0] == doctest::Approx(kl_oracle(sharp, train, test, rho)).epsilon(1e-9));
}

TEST_CASE("kl_view_criterion matches a direct evaluation") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::MatrixXd train = random_matrix(25, 4, rng, 0.0, 1.0);
        const Eigen::MatrixXd test = random_matrix(35, 4, rng, 0.2, 1.4);
        const ViewPartition part({{0, 1}, {2}, {3}}, {}, 4);
        const RatioProvider rp = fit_ratio_provider(train, test, part);
        const KlCriterion kl = kl_view_criterion(rp, train, test);
        REQUIRE(kl.divergence.size() == 3);
        for (int v = 0; v < 3; ++v) {
            const double oracle = kl_oracle(rp.view(v), part.extract_columns(v, train), part.extract_columns(v, test),
                                            rp.clip());
            CHECK(kl.divergence[static_cast<std::size_t>(v)] == doctest::Approx(oracle).epsilon(1e-9).scale(1.0));
        }
        // V_g and V_o partition the views
        auto g = kl.partition.generalized();
        auto o = kl.partition.non_generalized();
        g.insert(g.end(), o.begin(), o.end());
        std::sort(g.begin(), g.end());
        CHECK(g == std::vector<int>{0, 1, 2});

        CHECK(kl_view_criterion(rp, train, test, std::numeric_limits<double>::infinity()).partition.generalized().size() ==
              3);
        CHECK(kl_view_criterion(rp, train, test, 0.0).partition.generalized().empty());
    }
}

TEST_CASE("kl_view_criterion errors") {
    Rng rng(19);
    const Eigen::MatrixXd x = random_matrix(10, 2, rng);
    const RatioProvider rp = RatioProvider::constant(ViewPartition::per_feature(2), 1.0);
    CHECK_THROWS_AS((void)kl_view_criterion(rp, x, Eigen::MatrixXd(0, 2)), DataError);
    CHECK_THROWS_AS((void)kl_view_criterion(rp, x, random_matrix(10, 3, rng)), DataError);
    CHECK_THROWS_AS((void)kl_view_criterion(RatioProvider{}, x, x), ConfigError);
}
