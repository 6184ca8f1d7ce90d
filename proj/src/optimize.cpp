#include "dagbo/optimize.hpp"

#include <cmath>

namespace dagbo {

namespace {

Eigen::VectorXd project(Eigen::VectorXd x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace

AscentResult maximize_in_box(const ValueAndGradient& fn, Eigen::VectorXd start,
                             const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                             const AscentOptions& options) {
    AscentResult result;
    Eigen::VectorXd x = project(std::move(start), lower, upper);
    Eigen::VectorXd grad(x.size());
    double value = fn(x, &grad);
    result.argmax = x;
    result.value = value;
    if (!std::isfinite(value)) return result;

    double step = options.initial_step;
    Eigen::VectorXd trial_grad(x.size());
    for (int it = 0; it < options.max_iterations; ++it) {
        result.iterations = it + 1;
        // Projected gradient: zero components pushing against an active bound.
        const Eigen::VectorXd pg = project(x + grad, lower, upper) - x;
        if (pg.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
            result.converged = true;
            break;
        }
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            const Eigen::VectorXd trial = project(x + step * grad, lower, upper);
            const Eigen::VectorXd move = trial - x;
            if (move.lpNorm<Eigen::Infinity>() == 0.0) break;
            const double trial_value = fn(trial, &trial_grad);
            if (std::isfinite(trial_value) && trial_value >= value + 1e-4 * grad.dot(move)) {
                const double gain = trial_value - value;
                x = trial;
                value = trial_value;
                grad = trial_grad;
                accepted = true;
                step *= 2.0;
                if (gain < options.value_tolerance) result.converged = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted || result.converged) {
            result.converged = result.converged || !accepted;
            break;
        }
    }
    result.argmax = x;
    result.value = value;
    return result;
}

}  // namespace dagbo
