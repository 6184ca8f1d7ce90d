#include "dagbo/ode.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "dagbo/errors.hpp"

namespace dagbo {

namespace {

Eigen::VectorXd rk4_step(const OdeRhs& rhs, double t, const Eigen::VectorXd& y, double h) {
    const Eigen::Index n = y.size();
    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n);
    rhs(t, y, k1);
    rhs(t + 0.5 * h, y + 0.5 * h * k1, k2);
    rhs(t + 0.5 * h, y + 0.5 * h * k2, k3);
    rhs(t + h, y + h * k3, k4);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Eigen::MatrixXd fd_jacobian(const OdeRhs& rhs, double t, const Eigen::VectorXd& y, const Eigen::VectorXd& f0) {
    const Eigen::Index n = y.size();
    Eigen::MatrixXd J(n, n);
    Eigen::VectorXd yp = y, f1(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double d = 1e-7 * std::max(std::abs(y(j)), 1.0);
        yp(j) = y(j) + d;
        rhs(t, yp, f1);
        J.col(j) = (f1 - f0) / d;
        yp(j) = y(j);
    }
    return J;
}

// Solves k = f(t, base + a k) by Newton with a frozen Jacobian. Returns false
// when the iteration does not settle.
bool solve_stage(const OdeRhs& rhs, double t, const Eigen::VectorXd& base, double a,
                 const Eigen::PartialPivLU<Eigen::MatrixXd>& lu, Eigen::VectorXd& k) {
    Eigen::VectorXd f(base.size());
    for (int it = 0; it < 20; ++it) {
        rhs(t, base + a * k, f);
        const Eigen::VectorXd delta = lu.solve(f - k);
        if (!delta.allFinite()) return false;
        k += delta;
        const double scale = a * (1.0 + base.cwiseAbs().maxCoeff());
        if (a * delta.cwiseAbs().maxCoeff() <= 1e-13 * scale) return true;
    }
    return false;
}

// Two-stage L-stable SDIRK of order 2 (Alexander). Steps whose stage
// iterations fail are split in half, up to a fixed depth.
Eigen::VectorXd sdirk2_step(const OdeRhs& rhs, double t, const Eigen::VectorXd& y, double h, int depth = 0) {
    const double g = 1.0 - std::sqrt(0.5);
    const Eigen::Index n = y.size();
    Eigen::VectorXd f0(n);
    rhs(t, y, f0);
    const Eigen::MatrixXd J = fd_jacobian(rhs, t, y, f0);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd::Identity(n, n) - g * h * J);
    Eigen::VectorXd k1 = f0;
    bool ok = solve_stage(rhs, t + g * h, y, g * h, lu, k1);
    Eigen::VectorXd k2 = k1;
    ok = ok && solve_stage(rhs, t + h, y + (1.0 - g) * h * k1, g * h, lu, k2);
    if (!ok) {
        if (depth >= 12) return Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
        return sdirk2_step(rhs, t + 0.5 * h, sdirk2_step(rhs, t, y, 0.5 * h, depth + 1), 0.5 * h, depth + 1);
    }
    return y + h * ((1.0 - g) * k1 + g * k2);
}

Eigen::VectorXd take_step(OdeMethod method, const OdeRhs& rhs, double t, const Eigen::VectorXd& y, double h) {
    return method == OdeMethod::Rk4 ? rk4_step(rhs, t, y, h) : sdirk2_step(rhs, t, y, h);
}

// First event with g <= 0 at (t, y), or -1.
int fired(const std::vector<OdeEvent>& events, const OdeRhs& rhs, double t, const Eigen::VectorXd& y) {
    Eigen::VectorXd dy(y.size());
    rhs(t, y, dy);
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (!(events[i](t, y, dy) > 0.0)) return static_cast<int>(i);
    }
    return -1;
}

[[noreturn]] void fail(double t, const Eigen::VectorXd& y, long steps) {
    std::ostringstream msg;
    msg << "ODE state became non-finite at t=" << t << " after " << steps << " steps; last finite state:";
    for (Eigen::Index i = 0; i < y.size(); ++i) msg << ' ' << y(i);
    throw SimulationError(msg.str());
}

}  // namespace

OdeResult integrate(const OdeRhs& rhs, Eigen::VectorXd y0, double t0, double t_end,
                        const std::vector<OdeEvent>& events, const OdeOptions& options) {
    if (!(options.step > 0.0)) throw DomainError("integrate: step must be positive");
    OdeResult res;
    res.t = t0;
    res.y = std::move(y0);
    if (!res.y.allFinite()) fail(t0, res.y, 0);
    if ((res.event = fired(events, rhs, res.t, res.y)) >= 0) return res;

    while (res.t < t_end) {
        const double h = std::min(options.step, t_end - res.t);
        Eigen::VectorXd next = take_step(options.method, rhs, res.t, res.y, h);
        ++res.steps;
        const int ev = next.allFinite() ? fired(events, rhs, res.t + h, next) : -2;
        if (ev == -1) {
            res.t += h;
            res.y = std::move(next);
            continue;
        }
        // Bisect on the step length; lo stays event-free, hi has fired or gone non-finite.
        double lo = 0.0, hi = h;
        while (hi - lo > options.event_tolerance) {
            const double mid = 0.5 * (lo + hi);
            Eigen::VectorXd trial = take_step(options.method, rhs, res.t, res.y, mid);
            if (trial.allFinite() && fired(events, rhs, res.t + mid, trial) == -1) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Eigen::VectorXd end = take_step(options.method, rhs, res.t, res.y, hi);
        if (!end.allFinite()) fail(res.t + lo, take_step(options.method, rhs, res.t, res.y, lo), res.steps);
        res.event = fired(events, rhs, res.t + hi, end);
        res.t += hi;
        res.y = std::move(end);
        return res;
    }
    res.t = t_end;
    return res;
}

}  // namespace dagbo
