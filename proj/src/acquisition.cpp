#include "dagbo/acquisition.hpp"

#include <bit>
#include <numeric>

#include "dagbo/errors.hpp"
#include "dagbo/rng.hpp"

namespace dagbo {

namespace {

void rebuild_hv(AcquisitionContext& ctx) {
    ctx.baseline_hv.resize(ctx.fronts.size());
    for (std::size_t s = 0; s < ctx.fronts.size(); ++s) ctx.baseline_hv[s] = hypervolume(ctx.fronts[s]);
}

void check_candidate(const AcquisitionContext& ctx, const SampleTensor& samples) {
    if (samples.samples() != ctx.num_samples || samples.points() != 1 ||
        samples.objectives() != ctx.num_objectives()) {
        throw DimensionError("acquisition: candidate samples must have shape (S, 1, K)");
    }
}

}  // namespace

AcquisitionContext context_from_samples(const SampleTensor& baseline, const ObjectiveVector& reference) {
    if (baseline.samples() < 1) throw DimensionError("acquisition: need at least one sample");
    if (baseline.objectives() != static_cast<int>(reference.size())) {
        throw DimensionError("acquisition: reference point dimension mismatch");
    }
    AcquisitionContext ctx;
    ctx.dag = ObjectiveDag::empty(baseline.objectives());
    ctx.reference = reference;
    ctx.num_samples = baseline.samples();
    ctx.fronts.assign(static_cast<std::size_t>(ctx.num_samples), ParetoArchive(reference));
    for (int s = 0; s < ctx.num_samples; ++s) {
        for (int n = 0; n < baseline.points(); ++n) {
            auto v = baseline.vector(s, n);
            ctx.fronts[s].insert(ObjectiveVector(v.begin(), v.end()));
        }
    }
    rebuild_hv(ctx);
    return ctx;
}

AcquisitionContext prepare_context(const ZeroInflatedSurrogate& surrogate, const ObjectiveDag& dag,
                                   const Eigen::MatrixXd& X_observed, const ObjectiveVector& reference,
                                   int num_samples, std::uint64_t seed) {
    if (num_samples < 1) throw DimensionError("acquisition: need at least one sample");
    if (dag.size() != surrogate.num_objectives() ||
        static_cast<int>(reference.size()) != surrogate.num_objectives()) {
        throw DimensionError("acquisition: objective count mismatch");
    }
    SampleTensor baseline(num_samples, 0, surrogate.num_objectives());
    if (X_observed.rows() > 0) {
        baseline = resample(dag, draw_joint(surrogate, X_observed, num_samples, derive_seed(seed, {0}), true));
    }
    AcquisitionContext ctx = context_from_samples(baseline, reference);
    ctx.surrogate = &surrogate;
    ctx.dag = dag;
    ctx.candidate_seed = derive_seed(seed, {1});
    return ctx;
}

SampleTensor candidate_samples(const AcquisitionContext& ctx, const Eigen::VectorXd& x) {
    if (!ctx.surrogate) throw Error("acquisition: context has no surrogate");
    if (x.size() != ctx.surrogate->dim) throw DimensionError("acquisition: candidate dimension mismatch");
    const Eigen::MatrixXd xq = x.transpose();
    // Seeded by the input itself: distinct points get independent draws (a shared stream would make a
    // pending batch point and every later candidate move in lockstep), a repeated point gets the same draw.
    std::uint64_t seed = ctx.candidate_seed;
    for (Eigen::Index d = 0; d < x.size(); ++d) seed = derive_seed(seed, {std::bit_cast<std::uint64_t>(x(d))});
    return resample(ctx.dag, draw_joint(*ctx.surrogate, xq, ctx.num_samples, seed, true));
}

std::vector<double> hvi_contributions(const AcquisitionContext& ctx, const SampleTensor& samples) {
    check_candidate(ctx, samples);
    std::vector<double> out(static_cast<std::size_t>(ctx.num_samples));
    for (int s = 0; s < ctx.num_samples; ++s) out[s] = hvi(samples.vector(s, 0), ctx.fronts[s]);
    return out;
}

double qnehvi_from_samples(const AcquisitionContext& ctx, const SampleTensor& samples) {
    check_candidate(ctx, samples);
    double total = 0.0;
    for (int s = 0; s < ctx.num_samples; ++s) total += hvi(samples.vector(s, 0), ctx.fronts[s]);
    return total / ctx.num_samples;
}

double qnehvi(const AcquisitionContext& ctx, const Eigen::VectorXd& x) {
    return qnehvi_from_samples(ctx, candidate_samples(ctx, x));
}

void append_pending(AcquisitionContext& ctx, const SampleTensor& samples) {
    check_candidate(ctx, samples);
    for (int s = 0; s < ctx.num_samples; ++s) {
        auto v = samples.vector(s, 0);
        ctx.fronts[s].insert(ObjectiveVector(v.begin(), v.end()));
    }
    rebuild_hv(ctx);
}

BatchSelection select_batch_from_samples(AcquisitionContext ctx,
                                         const std::vector<SampleTensor>& pool_samples, int q) {
    const int n = static_cast<int>(pool_samples.size());
    if (n == 0) throw EmptyDataError("select_batch: empty pool");
    if (q < 1 || q > n) throw IndexError("select_batch: batch size must be in [1, pool size]");
    BatchSelection out;
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    for (int step = 0; step < q; ++step) {
        int best = -1;
        double best_value = -1.0;
        for (int i = 0; i < n; ++i) {
            if (taken[i]) continue;
            const double v = qnehvi_from_samples(ctx, pool_samples[i]);
            if (v > best_value) {
                best = i;
                best_value = v;
            }
        }
        taken[best] = true;
        out.indices.push_back(best);
        out.gains.push_back(best_value);
        if (step + 1 < q) append_pending(ctx, pool_samples[best]);
    }
    return out;
}

BatchSelection select_batch(AcquisitionContext ctx, const Eigen::MatrixXd& pool, int q) {
    if (pool.rows() == 0) throw EmptyDataError("select_batch: empty pool");
    std::vector<SampleTensor> samples;
    samples.reserve(static_cast<std::size_t>(pool.rows()));
    for (Eigen::Index i = 0; i < pool.rows(); ++i) samples.push_back(candidate_samples(ctx, pool.row(i).transpose()));
    return select_batch_from_samples(std::move(ctx), samples, q);
}

std::vector<int> select_random(int pool_size, int q, std::uint64_t seed) {
    if (pool_size < 1) throw EmptyDataError("select_random: empty pool");
    if (q < 0 || q > pool_size) throw IndexError("select_random: batch size exceeds the pool");
    std::vector<int> idx(static_cast<std::size_t>(pool_size));
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (int i = 0; i < q; ++i) {
        const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(pool_size - i)));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(static_cast<std::size_t>(q));
    return idx;
}

}  // namespace dagbo
