#ifndef DAGBO_OPTIMIZE_HPP
#define DAGBO_OPTIMIZE_HPP

#include <functional>

#include <Eigen/Dense>

namespace dagbo {

/// Objective value with its gradient. Returning a non-finite value marks the
/// point as infeasible; the line search then backs off.
using ValueAndGradient = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

struct AscentOptions {
    int max_iterations = 100;
    /// Stop when the projected gradient's infinity norm falls below this.
    double gradient_tolerance = 1e-5;
    /// Stop when an accepted step improves the value by less than this.
    double value_tolerance = 1e-9;
    double initial_step = 0.1;
};

struct AscentResult {
    Eigen::VectorXd argmax;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/**
 * Projected gradient ascent on a box with Armijo backtracking.
 *
 * The step length adapts: it doubles after each accepted step and halves
 * during backtracking, so well-scaled problems take a handful of evaluations
 * per iteration.
 */
AscentResult maximize_in_box(const ValueAndGradient& fn, Eigen::VectorXd start,
                             const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                             const AscentOptions& options = {});

}  // namespace dagbo

#endif  // DAGBO_OPTIMIZE_HPP
