#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace shiftlab {

/// Returns f(x) and writes the gradient into `grad`.
using SmoothObjective = std::function<double(const Eigen::VectorXd &x, Eigen::VectorXd &grad)>;

struct DescentOptions {
    double tolerance = 1e-6;  ///< stop when ||grad||_2 < tolerance
    int max_iterations = 2000;
    double armijo = 1e-4;
    double shrink = 0.5;
};

struct DescentResult {
    Eigen::VectorXd x;
    int iterations = 0;
    double gradient_norm = 0.0;
    bool converged = false;
    std::vector<double> objective_trace;  ///< f at the start and after every accepted step
};

/// Full-batch gradient descent with Armijo backtracking.
///
/// Each iteration tries the Barzilai-Borwein step first and halves it until the
/// sufficient-decrease condition holds, so the trace is monotone. Throws
/// NumericError when the objective or gradient becomes non-finite.
DescentResult minimize(const SmoothObjective &objective, Eigen::VectorXd x0, const DescentOptions &options = {});

/// Returns an objective estimate at x and writes a subgradient into `subgrad`.
using NonsmoothObjective = std::function<double(const Eigen::VectorXd &x, Eigen::VectorXd &subgrad)>;

struct SubgradientOptions {
    int iterations = 1000;
    double initial_step = 1.0;  ///< eta_t = initial_step / sqrt(t)
};

struct SubgradientResult {
    Eigen::VectorXd averaged;  ///< mean of the iterates from the second half of the run
    Eigen::VectorXd last;
    std::vector<double> objective_trace;  ///< objective estimate at each iterate before its step
    double best_objective = 0.0;
    double final_subgradient_norm = 0.0;
};

/// `subgrad` must include the gradient 2 ridge x of a ridge ||x||^2 term in the
/// objective. That term is then stepped implicitly,
///   x <- (x - eta_t (subgrad - 2 ridge x)) / (1 + 2 ridge eta_t),
/// which keeps the iterates bounded for any ridge under the fixed schedule.
SubgradientResult subgradient_descent(const NonsmoothObjective &objective, Eigen::VectorXd x0,
                                      const SubgradientOptions &options = {}, double ridge = 0.0);

}  // namespace shiftlab
