#include "dagbo/dag.hpp"

#include <algorithm>
#include <functional>
#include <queue>

#include "dagbo/errors.hpp"

namespace dagbo {

namespace {

// Returns an edge lying on some cycle, found as a DFS back edge.
DagEdge find_cycle_edge(int n, const std::vector<std::vector<int>>& children) {
    std::vector<int> color(n, 0);  // 0 new, 1 on stack, 2 done
    DagEdge found{-1, -1};
    std::function<bool(int)> visit = [&](int u) {
        color[u] = 1;
        for (int v : children[u]) {
            if (color[v] == 1) {
                found = {u, v};
                return true;
            }
            if (color[v] == 0 && visit(v)) return true;
        }
        color[u] = 2;
        return false;
    };
    for (int u = 0; u < n; ++u) {
        if (color[u] == 0 && visit(u)) break;
    }
    return found;
}

void check_shapes(const ObjectiveDag& dag, const JointPosteriorDraw& draw) {
    if (draw.beta.objectives() != dag.size() || draw.rho.objectives() != dag.size() ||
        draw.beta.samples() != draw.rho.samples() || draw.beta.points() != draw.rho.points()) {
        throw DimensionError("draw shape does not match the DAG's objective count");
    }
}

}  // namespace

ObjectiveDag ObjectiveDag::build(int num_objectives, const std::vector<DagEdge>& edges) {
    if (num_objectives <= 0) throw IndexError("ObjectiveDag needs at least one objective");
    const int n = num_objectives;
    ObjectiveDag dag;
    dag.parents_.assign(n, {});
    std::vector<std::vector<int>> children(n);
    for (const auto& e : edges) {
        if (e.parent < 0 || e.parent >= n || e.child < 0 || e.child >= n) {
            throw IndexError("edge " + std::to_string(e.parent) + "->" + std::to_string(e.child) +
                             " references a node outside [0, " + std::to_string(n) + ")");
        }
        if (std::find(dag.edges_.begin(), dag.edges_.end(), e) != dag.edges_.end()) continue;
        dag.edges_.push_back(e);
        dag.parents_[e.child].push_back(e.parent);
        children[e.parent].push_back(e.child);
    }
    for (auto& p : dag.parents_) std::sort(p.begin(), p.end());

    std::vector<int> indegree(n, 0);
    for (const auto& e : dag.edges_) ++indegree[e.child];
    std::priority_queue<int, std::vector<int>, std::greater<>> ready;
    for (int k = 0; k < n; ++k) {
        if (indegree[k] == 0) ready.push(k);
    }
    while (!ready.empty()) {
        const int u = ready.top();
        ready.pop();
        dag.order_.push_back(u);
        for (int v : children[u]) {
            if (--indegree[v] == 0) ready.push(v);
        }
    }
    if (static_cast<int>(dag.order_.size()) != n) {
        const DagEdge e = find_cycle_edge(n, children);
        throw CycleError("ObjectiveDag contains a cycle through edge " + std::to_string(e.parent) +
                         "->" + std::to_string(e.child));
    }

    dag.levels_.assign(n, 0);
    dag.ancestors_.assign(n, {});
    for (int u : dag.order_) {
        std::vector<int>& anc = dag.ancestors_[u];
        for (int p : dag.parents_[u]) {
            dag.levels_[u] = std::max(dag.levels_[u], dag.levels_[p] + 1);
            anc.push_back(p);
            anc.insert(anc.end(), dag.ancestors_[p].begin(), dag.ancestors_[p].end());
        }
        std::sort(anc.begin(), anc.end());
        anc.erase(std::unique(anc.begin(), anc.end()), anc.end());
    }
    return dag;
}

int ObjectiveDag::num_levels() const {
    return 1 + *std::max_element(levels_.begin(), levels_.end());
}

bool ObjectiveDag::is_topological(const std::vector<int>& order) const {
    const int n = size();
    if (static_cast<int>(order.size()) != n) return false;
    std::vector<int> position(n, -1);
    for (int i = 0; i < n; ++i) {
        if (order[i] < 0 || order[i] >= n || position[order[i]] != -1) return false;
        position[order[i]] = i;
    }
    return std::all_of(edges_.begin(), edges_.end(),
                       [&](const DagEdge& e) { return position[e.parent] < position[e.child]; });
}

JointPosteriorDraw gate(const ObjectiveDag& dag, const JointPosteriorDraw& draw,
                        const std::vector<int>& order) {
    check_shapes(dag, draw);
    if (!dag.is_topological(order)) throw IndexError("gate: order is not topological");
    JointPosteriorDraw out = draw;
    for (int s = 0; s < draw.samples(); ++s) {
        for (int m = 0; m < draw.points(); ++m) {
            // Top-down: a node stays on only if its own indicator and every
            // parent's gated indicator are on, which folds in all ancestors.
            for (int k : order) {
                bool on = draw.beta(s, m, k) != 0.0;
                for (int p : dag.parents(k)) on = on && out.beta(s, m, p) != 0.0;
                out.beta(s, m, k) = on ? 1.0 : 0.0;
                out.rho(s, m, k) = on ? draw.rho(s, m, k) : 0.0;
            }
        }
    }
    return out;
}

JointPosteriorDraw gate(const ObjectiveDag& dag, const JointPosteriorDraw& draw) {
    return gate(dag, draw, dag.topological_order());
}

SampleTensor resample(const ObjectiveDag& dag, const JointPosteriorDraw& draw) {
    return gate(dag, draw).rho;
}

SampleTensor ungated(const JointPosteriorDraw& draw) {
    SampleTensor out = draw.rho;
    for (int s = 0; s < draw.samples(); ++s) {
        for (int m = 0; m < draw.points(); ++m) {
            for (int k = 0; k < draw.objectives(); ++k) {
                if (draw.beta(s, m, k) == 0.0) out(s, m, k) = 0.0;
            }
        }
    }
    return out;
}

}  // namespace dagbo
