#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dagbo/errors.hpp"
#include "dagbo/rng.hpp"
#include "dagbo/testbeds.hpp"

using namespace dagbo;

namespace {

// Independent transcription of the fermentation model, integrated with an
// adaptive Dormand-Prince 5(4) pair.
namespace dopri {

using State = std::array<double, 5>;  // V, X, S, P, CO2

struct Model {
    double T, F, s_f, H;
    State rhs(const State& y) const {
        const double V = y[0], X = y[1], S = std::max(y[2], 0.0), P = y[3];
        const double loss = V * 2.5e-4 * (std::exp(5.0 * (T - 373.0) / (273.0 - 373.0)) - 1.0);
        const double dV = F - loss;
        const double mu = (0.092 / (1.0 + 1e-10 / H + H / 7e-5)) * (S / (0.15 * X + S)) *
                          (7e3 * std::exp(-5100.0 / (1.9872 * T)) - 1e33 * std::exp(-50000.0 / (1.9872 * T)));
        const double dX = mu * X - (X / V) * dV;
        const double mu_pp = 0.005 * (S / (0.0002 + S + S * S / 0.10));
        const double dS = -(mu / 0.45) * X - (mu_pp / 0.90) * X - 0.014 * X + F * s_f / V - (S / V) * dV;
        const double dP = mu_pp * X - 0.04 * P - (P / V) * dV;
        const double dC = 0.143 * dX + 4e-7 * X + 1e-4;
        return {dV, dX, dS, dP, dC};
    }
    bool stopped(const State& y) const { return y[0] > 180.0 || y[2] <= 0.0 || rhs(y)[3] <= 1e-11; }
};

State axpy(const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms) {
    State out = y;
    for (const auto& [c, k] : terms)
        for (int i = 0; i < 5; ++i) out[i] += h * c * (*k)[i];
    return out;
}

// One step; returns the 5th-order solution and writes the error estimate.
State step(const Model& m, const State& y, double h, double* err) {
    const State k1 = m.rhs(y);
    const State k2 = m.rhs(axpy(y, h, {{1.0 / 5, &k1}}));
    const State k3 = m.rhs(axpy(y, h, {{3.0 / 40, &k1}, {9.0 / 40, &k2}}));
    const State k4 = m.rhs(axpy(y, h, {{44.0 / 45, &k1}, {-56.0 / 15, &k2}, {32.0 / 9, &k3}}));
    const State k5 = m.rhs(axpy(y, h, {{19372.0 / 6561, &k1}, {-25360.0 / 2187, &k2}, {64448.0 / 6561, &k3},
                                       {-212.0 / 729, &k4}}));
    const State k6 = m.rhs(axpy(y, h, {{9017.0 / 3168, &k1}, {-355.0 / 33, &k2}, {46732.0 / 5247, &k3},
                                       {49.0 / 176, &k4}, {-5103.0 / 18656, &k5}}));
    const State y5 = axpy(y, h, {{35.0 / 384, &k1}, {500.0 / 1113, &k3}, {125.0 / 192, &k4},
                                 {-2187.0 / 6784, &k5}, {11.0 / 84, &k6}});
    if (err) {
        const State k7 = m.rhs(y5);
        const State y4 = axpy(y, h, {{5179.0 / 57600, &k1}, {7571.0 / 16695, &k3}, {393.0 / 640, &k4},
                                     {-92097.0 / 339200, &k5}, {187.0 / 2100, &k6}, {1.0 / 40, &k7}});
        double e = 0.0;
        for (int i = 0; i < 5; ++i) {
            const double sc = 1e-10 + 1e-8 * std::max(std::abs(y[i]), std::abs(y5[i]));
            e = std::max(e, std::abs(y5[i] - y4[i]) / sc);
        }
        *err = e;
    }
    return y5;
}

PenicillinOutput simulate(const Eigen::VectorXd& x) {
    const Model m{x(2), x(4), x(5), std::pow(10.0, -x(6))};
    State y{x(0), x(1), x(3), 0.0, 0.0};
    double t = 0.0, h = 1e-3;
    while (t < 2500.0) {
        h = std::min(h, 2500.0 - t);
        double err = 0.0;
        const State next = step(m, y, h, &err);
        if (err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            continue;
        }
        if (m.stopped(next)) {
            double lo = 0.0, hi = h;
            while (hi - lo > 1e-10) {
                const double mid = 0.5 * (lo + hi);
                (m.stopped(step(m, y, mid, nullptr)) ? hi : lo) = mid;
            }
            const State end = step(m, y, hi, nullptr);
            return {end[3], t + hi, end[4]};
        }
        t += h;
        y = next;
        h *= std::min(5.0, 0.9 * std::pow(std::max(err, 1e-10), -0.2));
    }
    return {y[3], 2500.0, y[4]};
}

}  // namespace dopri

Eigen::VectorXd penicillin_point(Rng& rng) {
    Eigen::VectorXd x(7);
    const auto& b = penicillin_bounds();
    for (int d = 0; d < 7; ++d) x(d) = rng.uniform(b[d].first, b[d].second);
    return x;
}

Eigen::VectorXd reference_input() {
    Eigen::VectorXd x(7);
    x << 90.0, 9.0, 298.0, 9.0, 0.25, 600.0, 5.75;
    return x;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("Branin and Currin closed forms") {
    const double pi = std::numbers::pi;
    CHECK(branin(-pi, 12.275) == doctest::Approx(0.397887).epsilon(1e-5 / 0.397887));
    CHECK(std::abs(branin(pi, 2.275) - branin(-pi, 12.275)) < 1e-6);
    CHECK(std::abs(branin(9.42478, 2.475) - branin(-pi, 12.275)) < 1e-6);

    const double currin_mid = (1.0 - std::exp(-1.0)) * 1868.5 / 159.5;
    CHECK(currin(0.5, 0.5) == doctest::Approx(currin_mid).epsilon(1e-14));
    CHECK(currin(0.0, 0.0) == doctest::Approx(3.0));

    Eigen::VectorXd x(2);
    x << (5.0 - pi) / 15.0, 12.275 / 15.0;
    CHECK(branin_currin(x).first == doctest::Approx(0.397887).epsilon(1e-4));
    x << 1.2, 0.5;
    CHECK_THROWS_AS(branin_currin(x), DomainError);
}

TEST_CASE("Branin-Currin task gating and determinism") {
    auto params = default_branin_currin_params();
    Rng rng(3);
    int failed = 0;
    for (int i = 0; i < 400; ++i) {
        Eigen::VectorXd x(2);
        x << rng.uniform(), rng.uniform();
        auto obs = branin_currin_task(x, params, 1000 + i);
        CHECK((obs.values[0] == 0.0 || obs.values[0] == 1.0));
        CHECK(obs.measured[0]);
        if (obs.values[0] == 0.0) {
            ++failed;
            CHECK_FALSE(obs.measured[1]);
            CHECK(std::isnan(obs.values[1]));
        } else {
            CHECK(obs.measured[1]);
            CHECK(obs.values[1] >= 0.0);
            CHECK(std::isfinite(obs.values[1]));
        }
        auto again = branin_currin_task(x, params, 1000 + i);
        CHECK(again.values[0] == obs.values[0]);
        CHECK((again.values[1] == obs.values[1] || (std::isnan(again.values[1]) && std::isnan(obs.values[1]))));
    }
    CHECK(failed > 0);
    CHECK(failed < 400);

    params.branin_threshold = kNoThreshold;
    Eigen::VectorXd x(2);
    x << 0.9, 0.9;
    auto always = branin_currin_task(x, params, 1);
    CHECK(always.values[0] == 1.0);
    CHECK(always.measured[1]);
}

TEST_CASE("Branin-Currin without input noise reproduces the noiseless values") {
    auto params = default_branin_currin_params();
    params.input_noise = 0.0;
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        Eigen::VectorXd x(2);
        x << rng.uniform(), rng.uniform();
        // Rescaled by hand from the unit square.
        const double b = branin(15.0 * x(0) - 5.0, 15.0 * x(1));
        const double c = (1.0 - std::exp(-1.0 / (2.0 * x(1)))) *
                         (2300.0 * std::pow(x(0), 3) + 1900.0 * x(0) * x(0) + 2092.0 * x(0) + 60.0) /
                         (100.0 * std::pow(x(0), 3) + 500.0 * x(0) * x(0) + 4.0 * x(0) + 20.0);
        const auto obs = branin_currin_task(x, params, 77 + i);
        const bool pass = -b >= params.branin_threshold;
        CHECK(obs.values[0] == (pass ? 1.0 : 0.0));
        if (pass) CHECK(obs.values[1] == doctest::Approx(-c - params.currin_shift).epsilon(1e-12));
    }
}

TEST_CASE("penicillin simulator agrees with an adaptive integrator") {
    Rng rng(17);
    std::vector<Eigen::VectorXd> inputs = {reference_input()};
    for (int i = 0; i < 5; ++i) inputs.push_back(penicillin_point(rng));
    for (const auto& x : inputs) {
        const auto a = penicillin_simulate(x);
        const auto b = dopri::simulate(x);
        CHECK(rel(a.yield, b.yield) < 1e-3);
        CHECK(rel(a.time, b.time) < 1e-3);
        CHECK(rel(a.co2, b.co2) < 1e-3);
    }
}

TEST_CASE("penicillin step refinement") {
    Rng rng(18);
    std::vector<Eigen::VectorXd> inputs = {reference_input()};
    for (int i = 0; i < 5; ++i) inputs.push_back(penicillin_point(rng));
    for (const auto& x : inputs) {
        PenicillinOptions half;
        half.step = 0.05;
        const auto a = penicillin_simulate(x);
        const auto b = penicillin_simulate(x, half);
        CHECK(rel(a.yield, b.yield) < 1e-4);
        CHECK(rel(a.time, b.time) < 1e-4);
        CHECK(rel(a.co2, b.co2) < 1e-4);
    }
}

TEST_CASE("penicillin feed comparison and bounds") {
    Eigen::VectorXd x = reference_input();
    Eigen::VectorXd no_feed = x;
    no_feed(4) = 0.0;
    PenicillinOptions unchecked;
    unchecked.check_bounds = false;
    CHECK(penicillin_simulate(no_feed, unchecked).yield <= penicillin_simulate(x).yield);
    CHECK_THROWS_AS(penicillin_simulate(no_feed), DomainError);
}

TEST_CASE("penicillin task gating") {
    const auto params = default_penicillin_params();
    Rng rng(19);
    int gated = 0;
    for (int i = 0; i < 60; ++i) {
        const Eigen::VectorXd x = penicillin_point(rng);
        const auto obs = penicillin_task(x, params, 500 + i);
        CHECK(obs.measured[0]);
        for (int k = 0; k < 3; ++k) {
            if (obs.measured[k]) {
                CHECK(std::isfinite(obs.values[k]));
                CHECK(obs.values[k] >= 0.0);
            } else {
                CHECK(std::isnan(obs.values[k]));
            }
        }
        // Downward closed: a measured child has a measured, passing parent.
        for (int k = 1; k < 3; ++k) {
            if (obs.measured[k]) CHECK((obs.measured[k - 1] && obs.values[k - 1] > 0.0));
            else CHECK((!obs.measured[k - 1] || obs.values[k - 1] == 0.0));
        }
        gated += !obs.measured[1];
        const auto again = penicillin_task(x, params, 500 + i);
        CHECK(again.measured == obs.measured);
        for (int k = 0; k < 3; ++k) {
            if (obs.measured[k]) CHECK(again.values[k] == obs.values[k]);
        }
    }
    CHECK(gated > 0);

    // Zero input noise reproduces the deterministic simulation.
    PenicillinParams quiet = params;
    quiet.input_noise = 0.0;
    quiet.yield_threshold = kNoThreshold;
    quiet.neg_time_threshold = kNoThreshold;
    const auto obs = penicillin_task(reference_input(), quiet, 7);
    const auto sim = penicillin_simulate(reference_input());
    CHECK(obs.values[0] == sim.yield - quiet.yield_shift);
    CHECK(obs.values[1] == -sim.time - quiet.neg_time_shift);
    CHECK(obs.values[2] == std::max(0.0, -sim.co2 - quiet.neg_co2_shift));

    // Yield below its threshold leaves both descendants unmeasured.
    PenicillinParams strict = quiet;
    strict.yield_threshold = sim.yield + 1.0;
    const auto low = penicillin_task(reference_input(), strict, 7);
    CHECK(low.values[0] == 0.0);
    CHECK_FALSE(low.measured[1]);
    CHECK_FALSE(low.measured[2]);
}
