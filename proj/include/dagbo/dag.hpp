#ifndef DAGBO_DAG_HPP
#define DAGBO_DAG_HPP

#include <string>
#include <vector>

#include "dagbo/draw.hpp"

namespace dagbo {

struct DagEdge {
    int parent = 0;
    int child = 0;
    bool operator==(const DagEdge&) const = default;
};

/**
 * Partial ordering over K objectives.
 *
 * Levels are longest-path depths from the roots, so every node sits strictly
 * below all of its parents. predecessors(k) is the full ancestor set.
 */
class ObjectiveDag {
public:
    /// Validates and derives ancestor sets, levels and a topological order.
    /// Throws IndexError for out-of-range nodes and CycleError (naming an
    /// edge on the cycle) for cyclic input.
    static ObjectiveDag build(int num_objectives, const std::vector<DagEdge>& edges);

    /// K nodes, no edges.
    static ObjectiveDag empty(int num_objectives) { return build(num_objectives, {}); }

    int size() const { return static_cast<int>(levels_.size()); }
    const std::vector<DagEdge>& edges() const { return edges_; }
    const std::vector<int>& parents(int k) const { return parents_.at(k); }
    /// Sorted ancestor indices of k.
    const std::vector<int>& predecessors(int k) const { return ancestors_.at(k); }
    int level(int k) const { return levels_.at(k); }
    int num_levels() const;
    /// Kahn order, lowest index first among ready nodes.
    const std::vector<int>& topological_order() const { return order_; }
    bool is_topological(const std::vector<int>& order) const;
    bool has_edges() const { return !edges_.empty(); }

private:
    std::vector<DagEdge> edges_;
    std::vector<std::vector<int>> parents_;
    std::vector<std::vector<int>> ancestors_;
    std::vector<int> levels_;
    std::vector<int> order_;
};

inline ObjectiveDag build_dag(int num_objectives, const std::vector<DagEdge>& edges) {
    return ObjectiveDag::build(num_objectives, edges);
}

/// Gated draw: beta-hat replaces beta and gamma-hat replaces rho. Nodes are
/// processed in `order`, which must be topological.
JointPosteriorDraw gate(const ObjectiveDag& dag, const JointPosteriorDraw& draw,
                        const std::vector<int>& order);

JointPosteriorDraw gate(const ObjectiveDag& dag, const JointPosteriorDraw& draw);

/// The resampling transform h: gamma-hat_k = rho_k when beta_k = 1 and every
/// ancestor's beta is 1, else exactly 0.
SampleTensor resample(const ObjectiveDag& dag, const JointPosteriorDraw& draw);

/// Ungated zero-inflated sample: gamma_k = beta_k ? rho_k : 0.
SampleTensor ungated(const JointPosteriorDraw& draw);

}  // namespace dagbo

#endif  // DAGBO_DAG_HPP
