#include "dagbo/testbeds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dagbo/errors.hpp"
#include "dagbo/ode.hpp"
#include "dagbo/rng.hpp"

namespace dagbo {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_unit_square(const Eigen::VectorXd& x) {
    if (x.size() != 2) throw DimensionError("branin_currin: expected 2 inputs");
    for (Eigen::Index i = 0; i < 2; ++i) {
        if (!(x(i) >= 0.0 && x(i) <= 1.0)) throw DomainError("branin_currin: input outside [0, 1]^2");
    }
}

// Linear interpolation between order statistics.
double percentile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

double branin(double u, double v) {
    const double pi = std::numbers::pi;
    const double b = 5.1 / (4.0 * pi * pi);
    const double c = 5.0 / pi;
    const double t = 1.0 / (8.0 * pi);
    const double a = v - b * u * u + c * u - 6.0;
    return a * a + 10.0 * (1.0 - t) * std::cos(u) + 10.0;
}

double currin(double x0, double x1) {
    // exp(-1 / (2 x1)) -> 0 as x1 -> 0, so the prefactor is 1 there.
    const double pre = x1 > 0.0 ? 1.0 - std::exp(-1.0 / (2.0 * x1)) : 1.0;
    const double num = 2300.0 * x0 * x0 * x0 + 1900.0 * x0 * x0 + 2092.0 * x0 + 60.0;
    const double den = 100.0 * x0 * x0 * x0 + 500.0 * x0 * x0 + 4.0 * x0 + 20.0;
    return pre * num / den;
}

std::pair<double, double> branin_currin(const Eigen::VectorXd& x) {
    check_unit_square(x);
    return {branin(15.0 * x(0) - 5.0, 15.0 * x(1)), currin(x(0), x(1))};
}

Observation branin_currin_task(const Eigen::VectorXd& x, const BraninCurrinParams& params,
                               std::uint64_t noise_seed) {
    check_unit_square(x);
    Rng rng(noise_seed);
    Eigen::VectorXd noisy(2);
    for (int i = 0; i < 2; ++i) noisy(i) = std::clamp(x(i) + params.input_noise * rng.normal(), 0.0, 1.0);
    const auto [b, c] = branin_currin(noisy);
    const double nb = -b;
    const double nc = -c;
    Observation obs;
    obs.input = x;
    obs.noise_seed = noise_seed;
    const bool pass = nb >= params.branin_threshold;
    obs.values = {pass ? 1.0 : 0.0, pass ? std::max(0.0, nc - params.currin_shift) : kNaN};
    obs.measured = {true, pass};
    return obs;
}

// ---------------------------------------------------------------------------

const std::array<std::pair<double, double>, 7>& penicillin_bounds() {
    static const std::array<std::pair<double, double>, 7> b = {{{60.0, 120.0},
                                                                {0.05, 18.0},
                                                                {293.0, 303.0},
                                                                {0.05, 18.0},
                                                                {0.01, 0.50},
                                                                {500.0, 700.0},
                                                                {5.0, 6.5}}};
    return b;
}

namespace {

namespace pc {
constexpr double Y_xs = 0.45, Y_ps = 0.90;
constexpr double K_1 = 1e-10, K_2 = 7e-5;
constexpr double m_X = 0.014;
constexpr double alpha_1 = 0.143, alpha_2 = 4e-7, alpha_3 = 1e-4;
constexpr double mu_X = 0.092, K_X = 0.15;
constexpr double mu_p = 0.005, K_p = 0.0002, K_I = 0.10;
constexpr double K = 0.04;
constexpr double k_g = 7e3, E_g = 5100.0;
constexpr double k_d = 1e33, E_d = 50000.0;
constexpr double lambd = 2.5e-4;
constexpr double T_v = 273.0, T_o = 373.0;
constexpr double R = 1.9872;
constexpr double V_max = 180.0;
constexpr double t_max = 2500.0;
constexpr double dp_floor = 1e-11;
}  // namespace pc

enum State { kV = 0, kX, kS, kP, kCO2 };

}  // namespace

PenicillinOutput penicillin_simulate(const Eigen::VectorXd& x, const PenicillinOptions& options) {
    if (x.size() != 7) throw DimensionError("penicillin_simulate: expected 7 inputs");
    if (options.check_bounds) {
        const auto& b = penicillin_bounds();
        for (int i = 0; i < 7; ++i) {
            if (!(x(i) >= b[i].first && x(i) <= b[i].second)) {
                throw DomainError("penicillin_simulate: input " + std::to_string(i) + " out of bounds");
            }
        }
    }
    const double T = x(2), F = x(4), s_f = x(5);
    const double H = std::pow(10.0, -x(6));
    const double growth = pc::mu_X / (1.0 + pc::K_1 / H + H / pc::K_2) *
                          (pc::k_g * std::exp(-pc::E_g / (pc::R * T)) - pc::k_d * std::exp(-pc::E_d / (pc::R * T)));
    const double loss_rate = pc::lambd * (std::exp(5.0 * (T - pc::T_o) / (pc::T_v - pc::T_o)) - 1.0);

    const OdeRhs rhs = [=](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const double V = y(kV), X = y(kX), S = y(kS), P = y(kP);
        // Intermediate stages can dip below S = 0 just before the event; the
        // uptake terms are clamped there so mu_pp's denominator stays away from 0.
        const double Sp = std::max(S, 0.0);
        const double dV = F - V * loss_rate;
        const double mu = growth * Sp / (pc::K_X * X + Sp);
        const double dX = mu * X - (X / V) * dV;
        const double mu_pp = pc::mu_p * Sp / (pc::K_p + Sp + Sp * Sp / pc::K_I);
        dy.resize(5);
        dy(kV) = dV;
        dy(kX) = dX;
        dy(kS) = -(mu / pc::Y_xs) * X - (mu_pp / pc::Y_ps) * X - pc::m_X * X + F * s_f / V - (S / V) * dV;
        dy(kP) = mu_pp * X - pc::K * P - (P / V) * dV;
        dy(kCO2) = pc::alpha_1 * dX + pc::alpha_2 * X + pc::alpha_3;
    };
    const std::vector<OdeEvent> events = {
        [](double, const Eigen::VectorXd& y, const Eigen::VectorXd&) { return pc::V_max - y(kV); },
        [](double, const Eigen::VectorXd& y, const Eigen::VectorXd&) { return y(kS); },
        [](double, const Eigen::VectorXd&, const Eigen::VectorXd& dy) { return dy(kP) - pc::dp_floor; },
    };
    Eigen::VectorXd y0(5);
    y0 << x(0), x(1), x(3), 0.0, 0.0;
    OdeOptions opts;
    opts.method = OdeMethod::Sdirk2;
    opts.step = options.step;
    const OdeResult r = integrate(rhs, y0, 0.0, pc::t_max, events, opts);
    return {r.y(kP), r.t, r.y(kCO2)};
}

Observation penicillin_task(const Eigen::VectorXd& x, const PenicillinParams& params,
                            std::uint64_t noise_seed) {
    const auto& b = penicillin_bounds();
    if (x.size() != 7) throw DimensionError("penicillin_task: expected 7 inputs");
    Eigen::VectorXd noisy = x;
    Rng rng(noise_seed);
    for (int i = 0; i < 7; ++i) {
        if (!(x(i) >= b[i].first && x(i) <= b[i].second)) {
            throw DomainError("penicillin_task: input " + std::to_string(i) + " out of bounds");
        }
        const double sd = params.input_noise * (b[i].second - b[i].first);
        noisy(i) = std::clamp(x(i) + sd * rng.normal(), b[i].first, b[i].second);
    }
    const PenicillinOutput out = penicillin_simulate(noisy);
    Observation obs;
    obs.input = x;
    obs.noise_seed = noise_seed;
    obs.values.assign(3, kNaN);
    obs.measured.assign(3, false);

    obs.measured[0] = true;
    const bool yield_pass = out.yield >= params.yield_threshold;
    obs.values[0] = yield_pass ? out.yield - params.yield_shift : 0.0;
    if (!yield_pass) return obs;

    obs.measured[1] = true;
    const bool time_pass = -out.time >= params.neg_time_threshold;
    obs.values[1] = time_pass ? -out.time - params.neg_time_shift : 0.0;
    if (!time_pass) return obs;

    obs.measured[2] = true;
    obs.values[2] = std::max(0.0, -out.co2 - params.neg_co2_shift);
    return obs;
}

// ---------------------------------------------------------------------------

// Frozen from `dagbo thresholds --testbed <name> --samples 10000 --seed 20240`.

BraninCurrinParams default_branin_currin_params() {
    BraninCurrinParams p;
    p.branin_threshold = -34.452733379627389;
    p.currin_shift = -14.423954563725022;
    p.input_noise = 0.01;
    return p;
}

PenicillinParams default_penicillin_params() {
    PenicillinParams p;
    p.yield_threshold = 23.907542052057401;
    p.neg_time_threshold = -900.55078848586072;
    p.yield_shift = -2.5553760881422858;
    p.neg_time_shift = -1573.3362370427546;
    p.neg_co2_shift = -86.414701937577675;
    p.input_noise = 0.01;
    return p;
}

bool Testbed::joint_positive(const Eigen::VectorXd& x) const {
    const std::vector<double> v = truth(x);
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (!(v[k] >= thresholds[k])) return false;
    }
    return true;
}

Testbed make_branin_currin(const BraninCurrinParams& params) {
    Testbed t;
    t.name = "branin-currin";
    t.bounds = {{0.0, 1.0}, {0.0, 1.0}};
    t.objective_names = {"branin_pass", "currin"};
    t.kinds = {ObjectiveKind::BinaryOnly, ObjectiveKind::ZeroInflated};
    t.edges = {{0, 1}};
    t.evaluate = [params](const Eigen::VectorXd& x, std::uint64_t seed) {
        return branin_currin_task(x, params, seed);
    };
    t.truth = [](const Eigen::VectorXd& x) {
        const auto [b, c] = branin_currin(x);
        return std::vector<double>{-b, -c};
    };
    t.thresholds = {params.branin_threshold, kNoThreshold};
    t.value_scale = {1.0, std::max(1.0, -params.currin_shift)};
    return t;
}

Testbed make_penicillin(const PenicillinParams& params) {
    Testbed t;
    t.name = "penicillin";
    for (const auto& b : penicillin_bounds()) t.bounds.push_back(b);
    t.objective_names = {"yield", "neg_time", "neg_co2"};
    t.kinds = {ObjectiveKind::ZeroInflated, ObjectiveKind::ZeroInflated, ObjectiveKind::ZeroInflated};
    t.edges = {{0, 1}, {1, 2}};
    t.evaluate = [params](const Eigen::VectorXd& x, std::uint64_t seed) {
        return penicillin_task(x, params, seed);
    };
    t.truth = [](const Eigen::VectorXd& x) {
        const PenicillinOutput out = penicillin_simulate(x);
        return std::vector<double>{out.yield, -out.time, -out.co2};
    };
    t.thresholds = {params.yield_threshold, params.neg_time_threshold, kNoThreshold};
    t.value_scale = {std::max(1e-6, -params.yield_shift), std::max(1e-6, -params.neg_time_shift),
                     std::max(1e-6, -params.neg_co2_shift)};
    return t;
}

ThresholdReport compute_thresholds(const std::string& testbed, int samples, std::uint64_t seed) {
    if (samples < 2) throw ConfigError("thresholds: need at least 2 samples");
    ThresholdReport rep;
    rep.testbed = testbed;
    rep.samples = samples;
    rep.seed = seed;
    Rng rng(seed);
    std::vector<std::vector<double>> cols;
    std::vector<double> quantile;
    if (testbed == "branin-currin") {
        rep.names = {"neg_branin", "neg_currin"};
        quantile = {0.5, -1.0};
        cols.resize(2);
        for (int i = 0; i < samples; ++i) {
            Eigen::VectorXd x(2);
            x << rng.uniform(), rng.uniform();
            const auto [b, c] = branin_currin(x);
            cols[0].push_back(-b);
            cols[1].push_back(-c);
        }
    } else if (testbed == "penicillin") {
        rep.names = {"yield", "neg_time", "neg_co2"};
        quantile = {0.6, 0.5, -1.0};
        cols.resize(3);
        const auto& b = penicillin_bounds();
        for (int i = 0; i < samples; ++i) {
            Eigen::VectorXd x(7);
            for (int d = 0; d < 7; ++d) x(d) = rng.uniform(b[d].first, b[d].second);
            try {
                const PenicillinOutput out = penicillin_simulate(x);
                cols[0].push_back(out.yield);
                cols[1].push_back(-out.time);
                cols[2].push_back(-out.co2);
            } catch (const SimulationError&) {
                ++rep.failures;
            }
        }
    } else {
        throw ConfigError("unknown testbed '" + testbed + "'");
    }
    for (std::size_t k = 0; k < cols.size(); ++k) {
        const auto [lo, hi] = std::minmax_element(cols[k].begin(), cols[k].end());
        rep.minimum.push_back(*lo);
        rep.maximum.push_back(*hi);
        rep.threshold.push_back(quantile[k] < 0.0 ? kNoThreshold : percentile(cols[k], quantile[k]));
        rep.shift.push_back(*lo - 0.05 * (*hi - *lo));
    }
    return rep;
}

}  // namespace dagbo
