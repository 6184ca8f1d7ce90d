#ifndef DAGBO_TESTBEDS_HPP
#define DAGBO_TESTBEDS_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dagbo/dag.hpp"
#include "dagbo/zimodel.hpp"

namespace dagbo {

/// One noisy evaluation. Unmeasured objectives hold NaN and a false flag.
struct Observation {
    Eigen::VectorXd input;
    std::vector<double> values;
    std::vector<bool> measured;
    std::uint64_t noise_seed = 0;
};

inline constexpr double kNoThreshold = -std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Branin-Currin

/// Branin on its native domain [-5, 10] x [0, 15].
double branin(double u, double v);

/// Currin exponential function on [0, 1]^2.
double currin(double x0, double x1);

/// (Branin, Currin) at x in the unit square; Branin is evaluated at
/// (15 x0 - 5, 15 x1). Throws DomainError outside [0, 1]^2.
std::pair<double, double> branin_currin(const Eigen::VectorXd& x);

struct BraninCurrinParams {
    /// Pass level for -Branin; objective 0 is 1{-Branin >= threshold}.
    double branin_threshold = 0.0;
    /// Objective 1 is -Currin - currin_shift (clamped at 0) when objective 0 passes.
    double currin_shift = 0.0;
    /// Input noise standard deviation as a fraction of the unit range; the
    /// perturbed input (clipped to the square) feeds both functions.
    double input_noise = 0.01;
};

/// Frozen defaults from `dagbo thresholds --testbed branin-currin`.
BraninCurrinParams default_branin_currin_params();

Observation branin_currin_task(const Eigen::VectorXd& x, const BraninCurrinParams& params,
                               std::uint64_t noise_seed);

// ---------------------------------------------------------------------------
// Penicillin fermentation

struct PenicillinOutput {
    double yield = 0.0;  // final penicillin concentration
    double time = 0.0;   // hours until termination
    double co2 = 0.0;    // cumulative CO2
};

/// Input order: culture volume, biomass concentration, temperature, glucose
/// concentration, substrate feed rate, substrate feed concentration, pH.
const std::array<std::pair<double, double>, 7>& penicillin_bounds();

struct PenicillinOptions {
    double step = 0.1;  // hours
    bool check_bounds = true;
};

/// Throws DomainError for out-of-bounds input (when checked) and
/// SimulationError when the integration breaks down.
PenicillinOutput penicillin_simulate(const Eigen::VectorXd& x, const PenicillinOptions& options = {});

struct PenicillinParams {
    double yield_threshold = kNoThreshold;
    double neg_time_threshold = kNoThreshold;
    double yield_shift = 0.0;
    double neg_time_shift = 0.0;
    double neg_co2_shift = 0.0;
    /// Input noise standard deviation as a fraction of each coordinate's range.
    double input_noise = 0.01;
};

/// Frozen defaults from `dagbo thresholds --testbed penicillin`.
PenicillinParams default_penicillin_params();

Observation penicillin_task(const Eigen::VectorXd& x, const PenicillinParams& params,
                            std::uint64_t noise_seed);

// ---------------------------------------------------------------------------
// Uniform interface used by the harness

struct Testbed {
    std::string name;
    std::vector<std::pair<double, double>> bounds;
    std::vector<std::string> objective_names;
    std::vector<ObjectiveKind> kinds;
    std::vector<DagEdge> edges;
    std::function<Observation(const Eigen::VectorXd&, std::uint64_t)> evaluate;
    /// Noiseless raw objectives in the maximization convention.
    std::function<std::vector<double>(const Eigen::VectorXd&)> truth;
    /// Pass level per objective (kNoThreshold for none).
    std::vector<double> thresholds;
    /// Rough spread of each objective's shifted values, used for prior regressors.
    std::vector<double> value_scale;

    int dim() const { return static_cast<int>(bounds.size()); }
    int num_objectives() const { return static_cast<int>(objective_names.size()); }
    /// Noiseless check that every objective passes its threshold.
    bool joint_positive(const Eigen::VectorXd& x) const;
};

Testbed make_branin_currin(const BraninCurrinParams& params);
Testbed make_penicillin(const PenicillinParams& params);

/// Sweep statistics behind the frozen defaults.
struct ThresholdReport {
    std::string testbed;
    int samples = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> names;  // raw maximization-convention objectives
    std::vector<double> minimum, maximum, threshold, shift;
    int failures = 0;  // simulator errors skipped
};

/// Uniform design-space sweep: thresholds at the configured percentiles,
/// shifts at min - 5% of range.
ThresholdReport compute_thresholds(const std::string& testbed, int samples, std::uint64_t seed);

}  // namespace dagbo

#endif  // DAGBO_TESTBEDS_HPP
