#include "shiftlab/error.hpp"
#include "shiftlab/game.hpp"
#include "shiftlab/random.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace shiftlab;
using shiftlab::testing::random_matrix;

namespace {

// Value of a 2x2 zero-sum game (row player minimizes) by the textbook formula.
double closed_form_value_2x2(const Eigen::Matrix2d &c) {
    // pure saddle point first: an entry that is the max of its row and min of its column
    const double upper = std::min(c.row(0).maxCoeff(), c.row(1).maxCoeff());
    const double lower = std::max(c.col(0).minCoeff(), c.col(1).minCoeff());
    if (std::abs(upper - lower) < 1e-14) {
        return upper;
    }
    const double det = c(0, 0) * c(1, 1) - c(0, 1) * c(1, 0);
    return det / (c(0, 0) + c(1, 1) - c(0, 1) - c(1, 0));
}

// min over a fine grid of estimator strategies of the best-response payoff.
double brute_force_value_2x2(const Eigen::Matrix2d &c, int steps) {
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s <= steps; ++s) {
        const double p = static_cast<double>(s) / steps;
        const double payoff = std::max(p * c(0, 0) + (1 - p) * c(1, 0), p * c(0, 1) + (1 - p) * c(1, 1));
        best = std::min(best, payoff);
    }
    return best;
}

bool is_distribution(const Eigen::VectorXd &p) {
    return (p.array() >= 0.0).all() && std::abs(p.sum() - 1.0) <= 1e-9;
}

void check_equilibrium(const CostMatrix &c, const GameSolution &s) {
    const Eigen::MatrixXd &m = c.entries();
    REQUIRE(is_distribution(s.p_hat));
    REQUIRE(is_distribution(s.p_check));
    CHECK((m.transpose() * s.p_hat).maxCoeff() - s.value <= 1e-6);
    CHECK(s.value - (m * s.p_check).minCoeff() <= 1e-6);
    CHECK(std::abs(s.p_hat.dot(m * s.p_check) - s.value) <= 1e-8);
}

}  // namespace

TEST_CASE("zero_one_cost") {
    Eigen::Matrix2d k2;
    k2 << 0, 1, 1, 0;
    CHECK(zero_one_cost(2).entries() == k2);
    CHECK(zero_one_cost(3).entries() == (Eigen::MatrixXd::Ones(3, 3) - Eigen::MatrixXd::Identity(3, 3)));
    for (int k = 2; k <= 6; ++k) {
        CHECK(zero_one_cost(k).entries().trace() == 0.0);
    }
}

TEST_CASE("augment") {
    const CostMatrix c = zero_one_cost(2);
    CHECK(augment(c, Potentials::Zero(2)).entries() == c.entries());

    Eigen::Matrix2d expected;
    expected << 1, 1, 2, 0;
    CHECK(augment(c, Potentials{{1.0, 0.0}}).entries() == expected);

    const Potentials psi{{0.3, -1.2, 2.0}};
    const CostMatrix c3 = zero_one_cost(3);
    const Eigen::MatrixXd shifted = augment(c3, (psi.array() + 4.5).matrix()).entries();
    CHECK((shifted - augment(c3, psi).entries()).isApprox(Eigen::MatrixXd::Constant(3, 3, 4.5)));

    CHECK_THROWS_AS((void)augment(c, Potentials::Zero(3)), DataError);
}

TEST_CASE("CostMatrix rejects non-finite entries") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
    m(1, 0) = std::nan("");
    CHECK_THROWS_AS(CostMatrix{m}, DataError);
    CHECK_THROWS_AS(CostMatrix{Eigen::MatrixXd(0, 0)}, DataError);
}

TEST_CASE("solve_minimax examples") {
    const GameSolution sym = solve_minimax(zero_one_cost(2));
    CHECK(sym.value == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sym.p_hat(0) == doctest::Approx(0.5));
    CHECK(sym.p_check(0) == doctest::Approx(0.5));

    Eigen::Matrix2d m;
    m << 1, 1, 2, 0;
    const GameSolution s = solve_minimax(CostMatrix(m));
    CHECK(s.value == doctest::Approx(brute_force_value_2x2(m, 100000)).epsilon(1e-9));
    CHECK(s.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.p_hat(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.p_check(0) == doctest::Approx(1.0).epsilon(1e-12));
    check_equilibrium(CostMatrix(m), s);

    // uniform 0-1 game on K classes has value (K-1)/K
    for (int k = 2; k <= 6; ++k) {
        CHECK(solve_minimax(zero_one_cost(k)).value == doctest::Approx((k - 1.0) / k).epsilon(1e-12));
    }
}

TEST_CASE("solve_minimax equilibrium on random games") {
    Rng rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        const int k = 2 + trial % 5;
        const CostMatrix c(random_matrix(k, k, rng, -3.0, 3.0));
        const GameSolution s = solve_minimax(c);
        check_equilibrium(c, s);
        CHECK(equilibrium_gap(c, s) <= 1e-6);
    }
}

TEST_CASE("solve_minimax matches the 2x2 closed form") {
    Rng rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const Eigen::Matrix2d m = random_matrix(2, 2, rng, -2.0, 2.0);
        const GameSolution s = solve_minimax(CostMatrix(m));
        CHECK(s.value == doctest::Approx(closed_form_value_2x2(m)).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("solve_minimax constant shift and player swap") {
    Rng rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        const int k = 2 + trial % 4;
        const Eigen::MatrixXd m = random_matrix(k, k, rng, -1.0, 1.0);
        const double shift = 5.0 * (uniform01(rng) - 0.5);
        const GameSolution s = solve_minimax(CostMatrix(m));
        const CostMatrix shifted(m.array() + shift);

        CHECK(solve_minimax(shifted).value == doctest::Approx(s.value + shift).epsilon(1e-9).scale(1.0));
        GameSolution moved = s;
        moved.value += shift;
        CHECK(equilibrium_gap(shifted, moved) <= 1e-6);

        const GameSolution swapped = solve_minimax(CostMatrix(-m.transpose()));
        CHECK(std::abs(s.value + swapped.value) <= 1e-8);
    }
}

TEST_CASE("solve_minimax degenerate games") {
    // identical rows and columns: many equilibria, any one is fine
    const CostMatrix flat(Eigen::MatrixXd::Constant(3, 3, 2.0));
    const GameSolution s = solve_minimax(flat);
    CHECK(s.value == doctest::Approx(2.0));
    check_equilibrium(flat, s);

    Eigen::MatrixXd dup(3, 3);
    dup << 0, 1, 1, 0, 1, 1, 1, 0, 0;
    const GameSolution d = solve_minimax(CostMatrix(dup));
    check_equilibrium(CostMatrix(dup), d);
    CHECK(d.value == doctest::Approx(0.5));
}

TEST_CASE("solve_standard_lp small program") {
    // max 3x + 2y s.t. x + y <= 4, x + 3y <= 6, x <= 3
    Eigen::MatrixXd a(3, 2);
    a << 1, 1, 1, 3, 1, 0;
    const LinearProgramSolution lp = solve_standard_lp(a, Eigen::Vector3d(4, 6, 3), Eigen::Vector2d(3, 2));
    REQUIRE(lp.bounded);
    CHECK(lp.objective == doctest::Approx(11.0));
    CHECK(lp.primal(0) == doctest::Approx(3.0));
    CHECK(lp.primal(1) == doctest::Approx(1.0));
    // strong duality
    CHECK(lp.dual.dot(Eigen::Vector3d(4, 6, 3)) == doctest::Approx(11.0));

    Eigen::MatrixXd open(1, 2);
    open << 1, -1;
    CHECK_FALSE(solve_standard_lp(open, Eigen::VectorXd::Ones(1), Eigen::Vector2d(0, 1)).bounded);
}
