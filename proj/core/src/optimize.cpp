#include "shiftlab/optimize.hpp"

#include "shiftlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shiftlab {

namespace {

void require_finite(double f, const Eigen::VectorXd &g, const char *where) {
    if (!std::isfinite(f) || !g.allFinite()) {
        throw NumericError(std::string("non-finite objective or gradient in ") + where);
    }
}

}  // namespace

DescentResult minimize(const SmoothObjective &objective, Eigen::VectorXd x0, const DescentOptions &options) {
    DescentResult result;
    result.x = std::move(x0);
    Eigen::VectorXd grad(result.x.size());
    double f = objective(result.x, grad);
    require_finite(f, grad, "gradient descent (initial point)");
    result.objective_trace.push_back(f);

    Eigen::VectorXd x_new(result.x.size());
    Eigen::VectorXd grad_new(result.x.size());
    double step = 1.0;
    for (int it = 0; it < options.max_iterations; ++it) {
        const double gnorm2 = grad.squaredNorm();
        result.gradient_norm = std::sqrt(gnorm2);
        if (result.gradient_norm < options.tolerance) {
            result.converged = true;
            return result;
        }
        double fnew = 0.0;
        bool accepted = false;
        for (int backtrack = 0; backtrack < 60; ++backtrack) {
            x_new = result.x - step * grad;
            fnew = objective(x_new, grad_new);
            if (std::isfinite(fnew) && fnew <= f - options.armijo * step * gnorm2) {
                accepted = true;
                break;
            }
            step *= options.shrink;
        }
        if (!accepted) {
            // no representable decrease along -grad: we are at the optimum up to rounding
            result.converged = result.gradient_norm < std::sqrt(options.tolerance);
            return result;
        }
        require_finite(fnew, grad_new, "gradient descent");

        const Eigen::VectorXd s = x_new - result.x;
        const Eigen::VectorXd yv = grad_new - grad;
        const double sy = s.dot(yv);
        step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-10, 1e10) : std::min(step * 2.0, 1e10);

        result.x.swap(x_new);
        grad.swap(grad_new);
        f = fnew;
        result.objective_trace.push_back(f);
        result.iterations = it + 1;
    }
    result.gradient_norm = grad.norm();
    result.converged = result.gradient_norm < options.tolerance;
    return result;
}

SubgradientResult subgradient_descent(const NonsmoothObjective &objective, Eigen::VectorXd x0,
                                      const SubgradientOptions &options, double ridge) {
    SubgradientResult result;
    Eigen::VectorXd x = std::move(x0);
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(x.size());
    int averaged = 0;
    const int burn_in = options.iterations / 2;
    result.best_objective = std::numeric_limits<double>::infinity();
    result.objective_trace.reserve(static_cast<std::size_t>(options.iterations));

    for (int t = 1; t <= options.iterations; ++t) {
        const double f = objective(x, g);
        require_finite(f, g, "subgradient descent");
        result.objective_trace.push_back(f);
        result.best_objective = std::min(result.best_objective, f);
        result.final_subgradient_norm = g.norm();
        const double eta = options.initial_step / std::sqrt(static_cast<double>(t));
        x = (x - eta * (g - 2.0 * ridge * x)) / (1.0 + 2.0 * ridge * eta);
        if (t > burn_in) {
            sum += x;
            ++averaged;
        }
    }
    result.last = x;
    result.averaged = averaged > 0 ? Eigen::VectorXd(sum / averaged) : x;
    return result;
}

}  // namespace shiftlab
