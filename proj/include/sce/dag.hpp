#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sce/error.hpp"

namespace sce::graph {

struct NodeDef {
    std::string name;
    std::vector<std::string> states;  // ordered labels; internal indices follow this order
};

// Immutable directed acyclic graph over named nodes with finite state spaces.
// Acyclicity, edge validity and label uniqueness are enforced at construction,
// so every CausalDag in flight satisfies its invariants.
class CausalDag {
public:
    CausalDag(std::vector<NodeDef> nodes, std::vector<std::pair<std::string, std::string>> edges);

    std::size_t node_count() const { return nodes_.size(); }
    const NodeDef& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
    const std::vector<NodeDef>& nodes() const { return nodes_; }

    // Declaration index of a node; throws UnknownNode.
    int index_of(const std::string& name) const;
    bool has_node(const std::string& name) const;

    // State index within a node's declared state list; throws UnknownState.
    int state_index(int node, const std::string& label) const;

    const std::vector<int>& parents(int node) const { return parents_[static_cast<std::size_t>(node)]; }
    const std::vector<int>& children(int node) const { return children_[static_cast<std::size_t>(node)]; }
    bool has_edge(int from, int to) const;
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

    // Every parent precedes its children; ties broken by declaration order.
    std::vector<int> topological_order() const;

private:
    std::vector<NodeDef> nodes_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> parents_;   // in declaration order of the parent nodes
    std::vector<std::vector<int>> children_;
};

enum class CutMode { incoming, outgoing };

// Copy of the DAG with all edges into (incoming) or out of (outgoing) the
// named node removed.
CausalDag cut_edges(const CausalDag& dag, const std::string& node, CutMode mode);

// Ancestral-moralize-delete-undirect d-separation test: restrict to ancestors
// of a|b|c, connect co-parents, drop c, drop orientation, and ask whether any
// undirected path still joins a and b.
bool d_separated(const CausalDag& dag,
                 const std::vector<std::string>& a,
                 const std::vector<std::string>& b,
                 const std::vector<std::string>& c);

// Do-calculus Rule 2 licence check: d-separation of y and z given x and w in
// the graph with incoming edges of x and outgoing edges of z removed. When it
// holds, p(y|x-hat, z-hat, w) = p(y|x-hat, z, w): observing z is as good as
// forcing it.
bool rule2_condition(const CausalDag& dag,
                     const std::vector<std::string>& y,
                     const std::vector<std::string>& z,
                     const std::vector<std::string>& x,
                     const std::vector<std::string>& w);

// Query-level role assignment. The five groups (cause, effect, mediators,
// observed covariates, and the implicit remainder of unobserved nodes) must
// be disjoint; cause != effect.
struct NodeRoleSpec {
    std::string cause;
    std::string effect;
    std::vector<std::string> mediators;
    std::vector<std::string> observed_covariates;

    void validate(const CausalDag& dag) const;
};

struct IdentifiabilityReport {
    bool identifiable = false;
    std::optional<std::vector<std::string>> witness_u1;  // blocks cause-effect in the outgoing-cut graph
    std::optional<std::vector<std::string>> witness_u2;  // blocks cause-mediators; absent when no mediators
    long checked_subsets = 0;
    // Set when the graph/role shape is not the plain mediation pattern the
    // identifiability result is proven for; the check still runs but the
    // conclusion carries no guarantee.
    std::optional<std::string> shape_caveat;
};

// Searches covariate subsets (increasing size, declaration order within a
// size) for witnesses making the cause d-separated from effect and mediators
// in the outgoing-cut graph. At most 16 observed covariates.
IdentifiabilityReport check_identifiability(const CausalDag& dag, const NodeRoleSpec& roles);

}  // namespace sce::graph
