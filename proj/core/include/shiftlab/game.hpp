#pragma once

#include <Eigen/Dense>

namespace shiftlab {

/// Payoff matrix of the inner game: rows are estimator actions, columns are
/// adversary actions, entries are the loss the estimator pays.
class CostMatrix {
  public:
    CostMatrix() = default;
    /// Throws DataError on non-finite entries or an empty matrix.
    explicit CostMatrix(Eigen::MatrixXd entries);

    [[nodiscard]] const Eigen::MatrixXd &entries() const { return entries_; }
    [[nodiscard]] Eigen::Index rows() const { return entries_.rows(); }
    [[nodiscard]] Eigen::Index cols() const { return entries_.cols(); }
    [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

  private:
    Eigen::MatrixXd entries_;
};

/// One additive term per adversary action.
using Potentials = Eigen::VectorXd;

struct GameSolution {
    Eigen::VectorXd p_hat;    ///< estimator (row, minimizing) mixed strategy
    Eigen::VectorXd p_check;  ///< adversary (column, maximizing) mixed strategy
    double value = 0.0;
};

/// C_ij = 0 when i == j, else 1.
CostMatrix zero_one_cost(int classes);

/// C'_ij = C_ij + psi_j.
CostMatrix augment(const CostMatrix &cost, const Potentials &psi);

/// Solves min_{p_hat} max_{p_check} p_hat^T C p_check by the simplex method.
/// Throws NumericError if the returned pair violates the equilibrium conditions
/// by more than 1e-6.
GameSolution solve_minimax(const CostMatrix &cost);

/// max( max_j (p_hat^T C)_j - value, value - min_i (C p_check)_i ); zero at an
/// exact equilibrium.
double equilibrium_gap(const CostMatrix &cost, const GameSolution &solution);

/// Result of max c^T x s.t. A x <= b, x >= 0 with b >= 0.
struct LinearProgramSolution {
    Eigen::VectorXd primal;
    Eigen::VectorXd dual;  ///< optimal multipliers of the rows of A
    double objective = 0.0;
    bool bounded = true;
};

/// Dense tableau simplex with Bland's pivoting rule (terminates on degenerate
/// problems). Requires b >= 0 so the origin is a feasible start.
LinearProgramSolution solve_standard_lp(const Eigen::MatrixXd &a, const Eigen::VectorXd &b, const Eigen::VectorXd &c);

}  // namespace shiftlab
