#include "shiftlab/game.hpp"

#include "shiftlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace shiftlab {

namespace {

constexpr double kPivotEps = 1e-12;

Eigen::VectorXd clean_distribution(Eigen::VectorXd p) {
    p = p.cwiseMax(0.0);
    const double total = p.sum();
    if (!(total > 0.0)) {
        throw NumericError("game solver produced an empty strategy");
    }
    return p / total;
}

}  // namespace

CostMatrix::CostMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    if (entries_.size() == 0) {
        throw DataError("cost matrix must be nonempty");
    }
    if (!entries_.allFinite()) {
        throw DataError("cost matrix contains non-finite entries");
    }
}

CostMatrix zero_one_cost(int classes) {
    if (classes < 2) {
        throw ConfigError("zero_one_cost needs at least two classes");
    }
    return CostMatrix(Eigen::MatrixXd::Ones(classes, classes) - Eigen::MatrixXd::Identity(classes, classes));
}

CostMatrix augment(const CostMatrix &cost, const Potentials &psi) {
    if (psi.size() != cost.cols()) {
        throw DataError("potentials have " + std::to_string(psi.size()) + " entries, cost matrix has " +
                        std::to_string(cost.cols()) + " columns");
    }
    Eigen::MatrixXd out = cost.entries();
    out.rowwise() += psi.transpose();
    return CostMatrix(std::move(out));
}

LinearProgramSolution solve_standard_lp(const Eigen::MatrixXd &a, const Eigen::VectorXd &b, const Eigen::VectorXd &c) {
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();
    if (b.size() != m || c.size() != n) {
        throw DataError("linear program dimensions disagree");
    }
    if ((b.array() < 0.0).any()) {
        throw DataError("standard-form linear program requires b >= 0");
    }
    const Eigen::Index width = n + m + 1;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, width);
    t.topLeftCorner(m, n) = a;
    t.block(0, n, m, m).setIdentity();
    t.col(width - 1).head(m) = b;
    t.row(m).head(n) = -c.transpose();

    std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        basis[static_cast<std::size_t>(i)] = n + i;
    }

    LinearProgramSolution out;
    const int max_pivots = 50 * static_cast<int>(m + n) + 100;
    for (int pivot = 0;; ++pivot) {
        if (pivot > max_pivots) {
            throw NumericError("simplex exceeded its pivot budget");
        }
        // Bland: lowest-index improving column
        Eigen::Index enter = -1;
        for (Eigen::Index j = 0; j < n + m; ++j) {
            if (t(m, j) < -kPivotEps) {
                enter = j;
                break;
            }
        }
        if (enter < 0) {
            break;
        }
        Eigen::Index leave = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < m; ++i) {
            if (t(i, enter) > kPivotEps) {
                const double ratio = t(i, width - 1) / t(i, enter);
                const bool tie = leave >= 0 && std::abs(ratio - best) <= kPivotEps;
                if ((!tie && ratio < best) ||
                    (tie && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
                    best = std::min(best, ratio);
                    leave = i;
                }
            }
        }
        if (leave < 0) {
            out.bounded = false;
            return out;
        }
        t.row(leave) /= t(leave, enter);
        for (Eigen::Index i = 0; i <= m; ++i) {
            if (i != leave && t(i, enter) != 0.0) {
                t.row(i) -= t(i, enter) * t.row(leave);
            }
        }
        basis[static_cast<std::size_t>(leave)] = enter;
    }

    out.primal = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (basis[static_cast<std::size_t>(i)] < n) {
            out.primal(basis[static_cast<std::size_t>(i)]) = t(i, width - 1);
        }
    }
    out.dual = t.row(m).segment(n, m).transpose();
    out.objective = t(m, width - 1);
    return out;
}

GameSolution solve_minimax(const CostMatrix &cost) {
    const Eigen::MatrixXd &c = cost.entries();
    // shift so every entry is >= 1 and the game value is positive
    const double shift = c.minCoeff() - 1.0;
    const Eigen::MatrixXd positive = c.array() - shift;

    // Estimator: maximize sum(u) s.t. positive^T u <= 1, u >= 0; p_hat = u / sum(u).
    // The LP dual is the adversary's problem, so its multipliers give p_check.
    const LinearProgramSolution lp = solve_standard_lp(
        positive.transpose(), Eigen::VectorXd::Ones(c.cols()), Eigen::VectorXd::Ones(c.rows()));
    if (!lp.bounded || !(lp.objective > 0.0)) {
        throw NumericError("minimax linear program did not reach a bounded optimum");
    }

    GameSolution sol;
    sol.p_hat = clean_distribution(lp.primal);
    sol.p_check = clean_distribution(lp.dual);
    sol.value = 1.0 / lp.objective + shift;

    const double gap = equilibrium_gap(cost, sol);
    if (!(gap <= 1e-6)) {
        throw NumericError("minimax solution violates equilibrium conditions (gap " + std::to_string(gap) + ")");
    }
    return sol;
}

double equilibrium_gap(const CostMatrix &cost, const GameSolution &solution) {
    const Eigen::MatrixXd &c = cost.entries();
    const double best_adversary = (solution.p_hat.transpose() * c).maxCoeff();
    const double best_estimator = (c * solution.p_check).minCoeff();
    return std::max(best_adversary - solution.value, solution.value - best_estimator);
}

}  // namespace shiftlab
