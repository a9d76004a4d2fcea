#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sce/dag.hpp"
#include "sce/dataset.hpp"
#include "sce/prob.hpp"

namespace sce::model {

// Conditional probability table of one node given its parents. Rows are
// indexed in mixed radix over the parent states with the first parent most
// significant; each row is a distribution over the child's states.
class Cpt {
public:
    Cpt(std::string child, std::vector<std::string> parents, std::size_t child_cardinality,
        std::vector<double> row_major_probs);

    const std::string& child() const { return child_; }
    const std::vector<std::string>& parents() const { return parents_; }
    std::size_t row_count() const { return rows_; }
    std::size_t child_cardinality() const { return child_card_; }

    // row-major (row * child_cardinality + state)
    const std::vector<double>& values() const { return values_; }
    double at(std::size_t row, int state) const {
        return values_[row * child_card_ + static_cast<std::size_t>(state)];
    }

private:
    std::string child_;
    std::vector<std::string> parents_;
    std::size_t child_card_;
    std::size_t rows_;
    std::vector<double> values_;
};

// Structural causal model: a DAG plus one CPT per node whose parent list
// matches the DAG edges exactly (causal Markov factorization).
class CausalModel {
public:
    CausalModel(graph::CausalDag dag, std::vector<Cpt> cpts);

    const graph::CausalDag& dag() const { return dag_; }
    const Cpt& cpt(int node) const { return cpts_[static_cast<std::size_t>(node)]; }
    const Cpt& cpt(const std::string& node) const { return cpt(dag_.index_of(node)); }

    // Parent indices of a node in the order its CPT declares them.
    const std::vector<int>& cpt_parent_indices(int node) const {
        return cpt_parents_[static_cast<std::size_t>(node)];
    }

private:
    graph::CausalDag dag_;
    std::vector<Cpt> cpts_;
    std::vector<std::vector<int>> cpt_parents_;
};

struct Intervention {
    // (node, state) pairs; nodes distinct
    std::vector<std::pair<std::string, std::string>> assignments;
};

// Exact joint by multiplying CPT entries over every configuration; variables
// appear in declaration order. Guarded at 1e7 cells.
prob::JointTable joint_distribution(const CausalModel& m);

// Truncated factorization: intervened nodes lose their incoming edges and
// their CPT becomes a point mass at the assigned state.
CausalModel intervene(const CausalModel& m, const Intervention& iv);

// p(target | do(interventions), observations), exactly. The result is the
// conditioned, marginalized joint over the target set in declaration order.
prob::JointTable query(const CausalModel& m, const std::vector<std::string>& target,
                       const Intervention& interventions = {},
                       const std::vector<std::pair<std::string, std::string>>& observations = {});

// Joint of the edge-cut model: every child of a cut edge integrates the cut
// parent out against that parent's marginal under m (computed before any
// cutting). Multi-edge cuts into one child use the product of source
// marginals.
prob::JointTable post_cutting(const CausalModel& m,
                              const std::vector<std::pair<std::string, std::string>>& cut);

// Ancestral sampling. Row i draws from the substream (seed, i); within a row,
// nodes consume one uniform each in topological order (inverse-CDF over the
// declared state order). Batch splits and thread counts cannot change the
// result.
Dataset sample(const CausalModel& m, std::size_t n, uint64_t seed);

}  // namespace sce::model
