#ifndef DAGBO_ODE_HPP
#define DAGBO_ODE_HPP

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace dagbo {

/// dy = f(t, y).
using OdeRhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy)>;

/// Terminal event: integration stops where g(t, y, dy) first becomes <= 0.
using OdeEvent = std::function<double(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& dy)>;

enum class OdeMethod {
    Rk4,
    /// Two-stage L-stable SDIRK, second order, Newton stage solves with a
    /// finite-difference Jacobian. For stiff systems.
    Sdirk2,
};

struct OdeOptions {
    OdeMethod method = OdeMethod::Rk4;
    double step = 0.1;
    /// Width of the bracket left when locating an event time.
    double event_tolerance = 1e-10;
};

struct OdeResult {
    double t = 0.0;
    Eigen::VectorXd y;
    int event = -1;  // index of the event that fired, -1 when t_end was reached
    long steps = 0;
};

/**
 * Fixed-step integration with terminal events.
 *
 * When an event changes sign over a step, its time is located by bisection on
 * the step length (each trial re-integrates one step from the step start).
 * Events already <= 0 at t0 fire immediately. Throws SimulationError when the
 * state stops being finite.
 */
OdeResult integrate(const OdeRhs& rhs, Eigen::VectorXd y0, double t0, double t_end,
                        const std::vector<OdeEvent>& events, const OdeOptions& options = {});

}  // namespace dagbo

#endif  // DAGBO_ODE_HPP
