#include "shiftlab/error.hpp"
#include "shiftlab/pca.hpp"
#include "shiftlab/random.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace shiftlab;

namespace {

Eigen::MatrixXd gaussian_rows(int n, const Eigen::MatrixXd &factor, Rng &rng) {
    Eigen::MatrixXd z(n, factor.cols());
    for (int i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < factor.cols(); ++j) {
            z(i, j) = standard_normal(rng);
        }
    }
    return z * factor.transpose();
}

}  // namespace

TEST_CASE("fit_pca on a line") {
    Eigen::MatrixXd data(5, 2);
    for (int i = 0; i < 5; ++i) {
        data(i, 0) = data(i, 1) = 0.5 * i - 1.0;
    }
    const PcaModel pca = fit_pca(data);
    REQUIRE(pca.rank() == 1);
    CHECK(pca.components(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(pca.components(0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(pca.eigenvalues(0) == doctest::Approx(2.0 * 0.625));  // var of (-1,-.5,0,.5,1) is 0.625 per axis
    CHECK((pca.reconstruct(pca.project(data)) - data).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fit_pca components are orthonormal and complete") {
    Rng rng(3);
    Eigen::MatrixXd factor(4, 4);
    factor << 2, 0, 0, 0, 0.5, 1, 0, 0, 0, 0.3, 0.7, 0, 0.1, 0, 0.2, 0.4;
    const Eigen::MatrixXd data = gaussian_rows(200, factor, rng);
    const PcaModel pca = fit_pca(data);
    REQUIRE(pca.rank() == 4);
    CHECK((pca.components * pca.components.transpose() - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);
    for (int k = 1; k < 4; ++k) {
        CHECK(pca.eigenvalues(k) <= pca.eigenvalues(k - 1));
    }
    CHECK((pca.reconstruct(pca.project(data)) - data).cwiseAbs().maxCoeff() < 1e-8);

    // eigenvalues are the variances of the scores
    const Eigen::MatrixXd scores = pca.project(data);
    for (int k = 0; k < 4; ++k) {
        const double var = (scores.col(k).array() - scores.col(k).mean()).square().sum() / (data.rows() - 1.0);
        CHECK(var == doctest::Approx(pca.eigenvalues(k)).epsilon(1e-9));
    }

    const PcaModel top2 = fit_pca(data, 2);
    CHECK(top2.rank() == 2);
    CHECK((top2.components - pca.components.topRows(2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fit_pca sign convention and isotropic data") {
    Rng rng(5);
    const Eigen::MatrixXd data = gaussian_rows(4000, Eigen::MatrixXd::Identity(3, 3), rng);
    const PcaModel pca = fit_pca(data);
    REQUIRE(pca.rank() == 3);
    CHECK(pca.eigenvalues(0) / pca.eigenvalues(2) < 1.2);
    for (int k = 0; k < 3; ++k) {
        Eigen::Index where = 0;
        pca.components.row(k).cwiseAbs().maxCoeff(&where);
        CHECK(pca.components(k, where) > 0.0);
    }
    const PcaModel flipped = fit_pca(-data);
    CHECK((flipped.components - pca.components).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("fit_pca degenerate input") {
    const Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(6, 3, 2.0);
    CHECK(fit_pca(constant).rank() == 0);
    CHECK_THROWS_AS((void)fit_pca(Eigen::MatrixXd::Zero(1, 3)), DataError);
}
