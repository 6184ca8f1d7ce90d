#ifndef DAGBO_ZIMODEL_HPP
#define DAGBO_ZIMODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dagbo/dag.hpp"
#include "dagbo/draw.hpp"
#include "dagbo/gp.hpp"

namespace dagbo {

enum class ObjectiveKind { BinaryOnly, ContinuousNoInflation, ZeroInflated };

const char* to_string(ObjectiveKind kind);

/**
 * Observed campaign data. Inputs are already mapped to the unit cube.
 * values(i, k) is only meaningful where measured(i, k) is true; a failed
 * parent leaves its descendants unmeasured rather than zero.
 */
struct Observations {
    Eigen::MatrixXd X;
    Eigen::MatrixXd values;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> measured;

    int size() const { return static_cast<int>(X.rows()); }
    int dim() const { return static_cast<int>(X.cols()); }
    int num_objectives() const { return static_cast<int>(values.cols()); }
};

struct SurrogateConfig {
    std::vector<ObjectiveKind> kinds;
    gp::FitConfig gp{};
    /// Standardized spread of the regressor attached to binary-only objectives.
    double narrow_sigma = 1e-6;
    /// Prior regressor used when an objective has no positive rows yet.
    /// Empty vectors mean mean 0 / scale 1.
    std::vector<double> prior_mean;
    std::vector<double> prior_scale;
};

struct ObjectiveModel {
    ObjectiveKind kind = ObjectiveKind::ZeroInflated;
    gp::GpClassifier classifier;
    gp::GpRegressor regressor;
    int classifier_rows = 0;
    int regressor_rows = 0;
    /// Set when the regressor fell back to the prior (no positive rows) or the
    /// classifier had no measurable rows.
    bool prior_fallback = false;
};

struct ZeroInflatedSurrogate {
    std::vector<ObjectiveModel> objectives;
    int dim = 0;

    int num_objectives() const { return static_cast<int>(objectives.size()); }
    bool any_fallback() const;
    std::vector<std::string> warnings() const;
};

/// Row masks used for fitting: classifier rows are those where objective k was
/// measured and every DAG predecessor passed (value > 0); regressor rows are
/// the classifier rows with value > 0 (all classifier rows for the
/// continuous-no-inflation kind).
std::vector<int> classifier_rows(const Observations& data, const ObjectiveDag& dag, int k);
std::vector<int> regressor_rows(const Observations& data, const ObjectiveDag& dag, int k,
                                ObjectiveKind kind);

/// Fits one classifier/regressor pair per objective. When `previous` is given
/// its hyperparameters seed the optimizer's default starting point.
ZeroInflatedSurrogate fit_surrogates(const Observations& data, const ObjectiveDag& dag,
                                     const SurrogateConfig& config,
                                     const ZeroInflatedSurrogate* previous = nullptr);

/// Mixture density of objective k at x: p(b=0|x) at c == 0, otherwise
/// p(b=1|x) times the regressor's predictive density (observation noise included).
double zero_inflated_density(const ZeroInflatedSurrogate& surrogate, const Eigen::VectorXd& x,
                             int k, double c);

/// S x M x K joint draw; objective k uses seeds derived from (seed, k).
JointPosteriorDraw draw_joint(const ZeroInflatedSurrogate& surrogate, const Eigen::MatrixXd& Xq,
                              int num_samples, std::uint64_t seed, bool include_noise);

}  // namespace dagbo

#endif  // DAGBO_ZIMODEL_HPP
