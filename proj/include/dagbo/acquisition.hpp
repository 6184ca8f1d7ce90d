#ifndef DAGBO_ACQUISITION_HPP
#define DAGBO_ACQUISITION_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "dagbo/dag.hpp"
#include "dagbo/draw.hpp"
#include "dagbo/pareto.hpp"
#include "dagbo/zimodel.hpp"

namespace dagbo {

/**
 * Monte Carlo state for batched noisy EHVI.
 *
 * fronts[s] is the Pareto front of the s-th transformed baseline sample,
 * grown in place as batch points are selected. Candidate samples are drawn
 * from a stream seeded by candidate_seed and the candidate's coordinates.
 */
struct AcquisitionContext {
    const ZeroInflatedSurrogate* surrogate = nullptr;  // null for hand-built contexts
    ObjectiveDag dag = ObjectiveDag::empty(1);
    ObjectiveVector reference;
    int num_samples = 0;
    std::uint64_t candidate_seed = 0;
    std::vector<ParetoArchive> fronts;
    std::vector<double> baseline_hv;

    int num_objectives() const { return static_cast<int>(reference.size()); }
};

/// Draws S noisy joint samples at the observed inputs, applies the DAG
/// transform and builds the per-sample fronts.
AcquisitionContext prepare_context(const ZeroInflatedSurrogate& surrogate, const ObjectiveDag& dag,
                                   const Eigen::MatrixXd& X_observed, const ObjectiveVector& reference,
                                   int num_samples, std::uint64_t seed);

/// Context from already-transformed baseline samples of shape (S, N, K).
AcquisitionContext context_from_samples(const SampleTensor& baseline, const ObjectiveVector& reference);

/// Transformed candidate samples, shape (S, 1, K).
SampleTensor candidate_samples(const AcquisitionContext& ctx, const Eigen::VectorXd& x);

/// Per-sample terms HVI(candidate_s | fronts[s]). `samples` is (S, 1, K).
std::vector<double> hvi_contributions(const AcquisitionContext& ctx, const SampleTensor& samples);

/// Mean of hvi_contributions.
double qnehvi_from_samples(const AcquisitionContext& ctx, const SampleTensor& samples);

double qnehvi(const AcquisitionContext& ctx, const Eigen::VectorXd& x);

/// Adds the s-th candidate sample to fronts[s] for every s.
void append_pending(AcquisitionContext& ctx, const SampleTensor& samples);

struct BatchSelection {
    std::vector<int> indices;
    std::vector<double> gains;  // qnehvi of each winner at its step
};

/// Greedy sequential batch over pool rows. Ties go to the lowest index.
/// `ctx` is taken by value; the caller's fronts are untouched.
BatchSelection select_batch(AcquisitionContext ctx, const Eigen::MatrixXd& pool, int q);

/// Same greedy loop over precomputed candidate samples.
BatchSelection select_batch_from_samples(AcquisitionContext ctx,
                                         const std::vector<SampleTensor>& pool_samples, int q);

/// q distinct indices from [0, pool_size), uniformly without replacement.
std::vector<int> select_random(int pool_size, int q, std::uint64_t seed);

}  // namespace dagbo

#endif  // DAGBO_ACQUISITION_HPP
