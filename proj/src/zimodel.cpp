#include "dagbo/zimodel.hpp"

#include <cmath>
#include <numbers>

#include "dagbo/errors.hpp"
#include "dagbo/rng.hpp"

namespace dagbo {

const char* to_string(ObjectiveKind kind) {
    switch (kind) {
        case ObjectiveKind::BinaryOnly: return "binary-only";
        case ObjectiveKind::ContinuousNoInflation: return "continuous-no-inflation";
        case ObjectiveKind::ZeroInflated: return "zero-inflated";
    }
    return "unknown";
}

bool ZeroInflatedSurrogate::any_fallback() const {
    for (const auto& m : objectives) {
        if (m.prior_fallback) return true;
    }
    return false;
}

std::vector<std::string> ZeroInflatedSurrogate::warnings() const {
    std::vector<std::string> out;
    for (int k = 0; k < num_objectives(); ++k) {
        if (objectives[k].prior_fallback) {
            out.push_back("objective " + std::to_string(k) + ": no usable rows, prior model in use");
        }
    }
    return out;
}

namespace {

void check_shapes(const Observations& data, const ObjectiveDag& dag) {
    if (data.values.rows() != data.X.rows() || data.measured.rows() != data.X.rows() ||
        data.measured.cols() != data.values.cols()) {
        throw DimensionError("Observations: inconsistent row/column counts");
    }
    if (data.num_objectives() != dag.size()) {
        throw DimensionError("Observations: objective count does not match the DAG");
    }
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& A, const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), A.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = A.row(rows[i]);
    return out;
}

gp::FitConfig warm_config(const gp::FitConfig& base, std::uint64_t seed, const gp::KernelParams* kernel,
                          const double* noise, const double* mean) {
    gp::FitConfig cfg = base;
    cfg.seed = seed;
    if (kernel) cfg.initial_kernel = *kernel;
    if (noise) cfg.initial_noise = std::max(*noise, cfg.bounds.noise_min);
    if (mean) cfg.initial_mean = *mean;
    return cfg;
}

}  // namespace

std::vector<int> classifier_rows(const Observations& data, const ObjectiveDag& dag, int k) {
    std::vector<int> rows;
    for (int i = 0; i < data.size(); ++i) {
        if (!data.measured(i, k)) continue;
        bool ok = true;
        for (int j : dag.predecessors(k)) {
            if (!data.measured(i, j) || !(data.values(i, j) > 0.0)) {
                ok = false;
                break;
            }
        }
        if (ok) rows.push_back(i);
    }
    return rows;
}

std::vector<int> regressor_rows(const Observations& data, const ObjectiveDag& dag, int k,
                                ObjectiveKind kind) {
    std::vector<int> rows = classifier_rows(data, dag, k);
    if (kind == ObjectiveKind::ContinuousNoInflation) return rows;
    std::erase_if(rows, [&](int i) { return !(data.values(i, k) > 0.0); });
    return rows;
}

ZeroInflatedSurrogate fit_surrogates(const Observations& data, const ObjectiveDag& dag,
                                     const SurrogateConfig& config,
                                     const ZeroInflatedSurrogate* previous) {
    check_shapes(data, dag);
    if (data.size() == 0) throw EmptyDataError("fit_surrogates: empty dataset");
    const int K = data.num_objectives();
    if (static_cast<int>(config.kinds.size()) != K) {
        throw ConfigError("fit_surrogates: one objective kind per objective is required");
    }
    if (previous && (previous->num_objectives() != K || previous->dim != data.dim())) previous = nullptr;

    ZeroInflatedSurrogate out;
    out.dim = data.dim();
    for (int k = 0; k < K; ++k) {
        ObjectiveModel model;
        model.kind = config.kinds[k];
        const ObjectiveModel* prev = previous ? &previous->objectives[k] : nullptr;
        const std::uint64_t cls_seed = derive_seed(config.gp.seed, {static_cast<std::uint64_t>(k), 0});
        const std::uint64_t reg_seed = derive_seed(config.gp.seed, {static_cast<std::uint64_t>(k), 1});

        const std::vector<int> crows = classifier_rows(data, dag, k);
        model.classifier_rows = static_cast<int>(crows.size());
        if (model.kind == ObjectiveKind::ContinuousNoInflation) {
            model.classifier = gp::GpClassifier::constant(out.dim, 1.0);
        } else if (crows.empty()) {
            model.classifier = gp::GpClassifier::constant(out.dim, 0.5);
            model.prior_fallback = true;
        } else {
            std::vector<int> labels;
            for (int i : crows) labels.push_back(data.values(i, k) > 0.0 ? 1 : 0);
            const bool warm = prev && !prev->classifier.is_constant();
            const double m = warm ? prev->classifier.latent_mean_constant() : 0.0;
            model.classifier = gp::GpClassifier::fit(
                take_rows(data.X, crows), labels,
                warm_config(config.gp, cls_seed, warm ? &prev->classifier.kernel() : nullptr, nullptr,
                            warm ? &m : nullptr));
        }

        if (model.kind == ObjectiveKind::BinaryOnly) {
            // Degenerate regressor: rho ~ N(0, sigma^2) everywhere.
            model.regressor = gp::GpRegressor::narrow(out.dim, 0.0, 1.0, config.narrow_sigma);
        } else {
            const std::vector<int> rrows = regressor_rows(data, dag, k, model.kind);
            model.regressor_rows = static_cast<int>(rrows.size());
            if (rrows.empty()) {
                const double mean = k < static_cast<int>(config.prior_mean.size()) ? config.prior_mean[k] : 0.0;
                const double scale = k < static_cast<int>(config.prior_scale.size()) ? config.prior_scale[k] : 1.0;
                model.regressor = gp::GpRegressor::prior(out.dim, mean, scale, config.gp);
                model.prior_fallback = true;
            } else {
                Eigen::VectorXd y(static_cast<Eigen::Index>(rrows.size()));
                for (std::size_t i = 0; i < rrows.size(); ++i) y(static_cast<Eigen::Index>(i)) = data.values(rrows[i], k);
                const bool warm = prev && !prev->regressor.is_prior() && prev->kind == model.kind;
                const double noise = warm ? prev->regressor.noise_variance() : 0.0;
                const double mean = warm ? prev->regressor.mean_constant() : 0.0;
                model.regressor = gp::GpRegressor::fit(
                    take_rows(data.X, rrows), y,
                    warm_config(config.gp, reg_seed, warm ? &prev->regressor.kernel() : nullptr,
                                warm ? &noise : nullptr, warm ? &mean : nullptr));
            }
        }
        out.objectives.push_back(std::move(model));
    }
    return out;
}

double zero_inflated_density(const ZeroInflatedSurrogate& surrogate, const Eigen::VectorXd& x,
                             int k, double c) {
    if (k < 0 || k >= surrogate.num_objectives()) throw IndexError("zero_inflated_density: bad objective index");
    if (x.size() != surrogate.dim) throw DimensionError("zero_inflated_density: bad point dimension");
    const ObjectiveModel& m = surrogate.objectives[k];
    const Eigen::MatrixXd xq = x.transpose();
    const double p = m.classifier.probability(xq)(0);
    if (c == 0.0) return 1.0 - p;
    const gp::Prediction pred = m.regressor.predict(xq, true);
    const double var = pred.variance(0);
    const double z = c - pred.mean(0);
    return p * std::exp(-0.5 * z * z / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

JointPosteriorDraw draw_joint(const ZeroInflatedSurrogate& surrogate, const Eigen::MatrixXd& Xq,
                              int num_samples, std::uint64_t seed, bool include_noise) {
    if (Xq.cols() != surrogate.dim) throw DimensionError("draw_joint: bad query dimension");
    if (num_samples <= 0) throw DimensionError("draw_joint: sample count must be positive");
    const int S = num_samples;
    const int M = static_cast<int>(Xq.rows());
    const int K = surrogate.num_objectives();
    JointPosteriorDraw draw{SampleTensor(S, M, K), SampleTensor(S, M, K)};
    for (int k = 0; k < K; ++k) {
        const ObjectiveModel& m = surrogate.objectives[k];
        const std::uint64_t base = derive_seed(seed, {static_cast<std::uint64_t>(k)});
        const Eigen::MatrixXi b = m.classifier.sample(Xq, S, derive_seed(base, {0}));
        const Eigen::MatrixXd r = m.regressor.sample(Xq, S, derive_seed(base, {1}), include_noise);
        for (int s = 0; s < S; ++s) {
            for (int j = 0; j < M; ++j) {
                draw.beta(s, j, k) = b(s, j);
                draw.rho(s, j, k) = r(s, j);
            }
        }
    }
    return draw;
}

}  // namespace dagbo
