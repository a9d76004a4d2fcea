#include "sce/dag.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace sce::graph {

namespace {

std::vector<int> resolve(const CausalDag& dag, const std::vector<std::string>& names) {
    std::vector<int> out;
    out.reserve(names.size());
    for (const auto& n : names) out.push_back(dag.index_of(n));
    return out;
}

void require_disjoint(const std::vector<std::vector<int>>& sets) {
    std::unordered_set<int> seen;
    for (const auto& s : sets) {
        for (int v : s) {
            if (!seen.insert(v).second) fail(Errc::overlapping_sets, "node appears in more than one set");
        }
    }
}

}  // namespace

CausalDag::CausalDag(std::vector<NodeDef> nodes, std::vector<std::pair<std::string, std::string>> edges)
    : nodes_(std::move(nodes)) {
    std::unordered_map<std::string, int> index;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& def = nodes_[i];
        if (!index.emplace(def.name, static_cast<int>(i)).second)
            fail(Errc::validation_error, "duplicate node '" + def.name + "'");
        if (def.states.size() < 1)
            fail(Errc::validation_error, "node '" + def.name + "' declares no states");
        std::set<std::string> labels(def.states.begin(), def.states.end());
        if (labels.size() != def.states.size())
            fail(Errc::validation_error, "node '" + def.name + "' has duplicate state labels");
    }

    parents_.resize(nodes_.size());
    children_.resize(nodes_.size());
    std::set<std::pair<int, int>> seen;
    for (const auto& [from, to] : edges) {
        auto f = index.find(from);
        auto t = index.find(to);
        if (f == index.end()) fail(Errc::unknown_node, "edge endpoint '" + from + "'");
        if (t == index.end()) fail(Errc::unknown_node, "edge endpoint '" + to + "'");
        if (f->second == t->second) fail(Errc::validation_error, "self-loop on '" + from + "'");
        if (!seen.insert({f->second, t->second}).second)
            fail(Errc::validation_error, "duplicate edge " + from + " -> " + to);
        edges_.push_back({f->second, t->second});
    }
    // normalize adjacency to declaration order so downstream iteration is deterministic
    for (const auto& [f, t] : edges_) {
        parents_[static_cast<std::size_t>(t)].push_back(f);
        children_[static_cast<std::size_t>(f)].push_back(t);
    }
    for (auto& p : parents_) std::sort(p.begin(), p.end());
    for (auto& c : children_) std::sort(c.begin(), c.end());

    topological_order();  // throws CyclicGraph on a cycle
}

int CausalDag::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].name == name) return static_cast<int>(i);
    fail(Errc::unknown_node, "'" + name + "'");
}

bool CausalDag::has_node(const std::string& name) const {
    for (const auto& n : nodes_)
        if (n.name == name) return true;
    return false;
}

int CausalDag::state_index(int node, const std::string& label) const {
    const auto& states = nodes_[static_cast<std::size_t>(node)].states;
    for (std::size_t i = 0; i < states.size(); ++i)
        if (states[i] == label) return static_cast<int>(i);
    fail(Errc::unknown_state, "'" + label + "' is not a state of '" + nodes_[static_cast<std::size_t>(node)].name + "'");
}

bool CausalDag::has_edge(int from, int to) const {
    const auto& ch = children_[static_cast<std::size_t>(from)];
    return std::find(ch.begin(), ch.end(), to) != ch.end();
}

std::vector<int> CausalDag::topological_order() const {
    const int n = static_cast<int>(nodes_.size());
    std::vector<int> indegree(static_cast<std::size_t>(n), 0);
    for (int v = 0; v < n; ++v) indegree[static_cast<std::size_t>(v)] = static_cast<int>(parents(v).size());

    // min-heap on declaration index gives the deterministic tie-break
    std::priority_queue<int, std::vector<int>, std::greater<>> ready;
    for (int v = 0; v < n; ++v)
        if (indegree[static_cast<std::size_t>(v)] == 0) ready.push(v);

    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(n));
    while (!ready.empty()) {
        int v = ready.top();
        ready.pop();
        order.push_back(v);
        for (int c : children(v))
            if (--indegree[static_cast<std::size_t>(c)] == 0) ready.push(c);
    }
    if (static_cast<int>(order.size()) != n) fail(Errc::cyclic_graph, "graph has no topological order");
    return order;
}

CausalDag cut_edges(const CausalDag& dag, const std::string& node, CutMode mode) {
    const int pivot = dag.index_of(node);
    std::vector<std::pair<std::string, std::string>> kept;
    for (const auto& [f, t] : dag.edges()) {
        const bool drop = (mode == CutMode::incoming) ? (t == pivot) : (f == pivot);
        if (!drop) kept.push_back({dag.node(f).name, dag.node(t).name});
    }
    return CausalDag(dag.nodes(), std::move(kept));
}

bool d_separated(const CausalDag& dag,
                 const std::vector<std::string>& a,
                 const std::vector<std::string>& b,
                 const std::vector<std::string>& c) {
    if (a.empty() || b.empty()) fail(Errc::validation_error, "d-separation needs nonempty endpoint sets");
    const auto ai = resolve(dag, a);
    const auto bi = resolve(dag, b);
    const auto ci = resolve(dag, c);
    require_disjoint({ai, bi, ci});

    const int n = static_cast<int>(dag.node_count());

    // step 1: ancestral closure of a|b|c
    std::vector<char> keep(static_cast<std::size_t>(n), 0);
    std::vector<int> frontier;
    auto mark = [&](int v) {
        if (!keep[static_cast<std::size_t>(v)]) {
            keep[static_cast<std::size_t>(v)] = 1;
            frontier.push_back(v);
        }
    };
    for (int v : ai) mark(v);
    for (int v : bi) mark(v);
    for (int v : ci) mark(v);
    while (!frontier.empty()) {
        int v = frontier.back();
        frontier.pop_back();
        for (int p : dag.parents(v)) mark(p);
    }

    // steps 2-4: moralize within the closure, delete c, forget orientation
    std::vector<char> removed(static_cast<std::size_t>(n), 0);
    for (int v : ci) removed[static_cast<std::size_t>(v)] = 1;

    std::vector<std::vector<char>> adj(static_cast<std::size_t>(n),
                                       std::vector<char>(static_cast<std::size_t>(n), 0));
    auto connect = [&](int u, int v) {
        if (u == v) return;
        if (removed[static_cast<std::size_t>(u)] || removed[static_cast<std::size_t>(v)]) return;
        adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = 1;
        adj[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] = 1;
    };
    for (int v = 0; v < n; ++v) {
        if (!keep[static_cast<std::size_t>(v)]) continue;
        const auto& ps = dag.parents(v);
        for (std::size_t i = 0; i < ps.size(); ++i) {
            connect(ps[i], v);
            for (std::size_t j = i + 1; j < ps.size(); ++j) connect(ps[i], ps[j]);
        }
    }

    // step 5: any undirected path from a to b?
    std::vector<char> reached(static_cast<std::size_t>(n), 0);
    std::vector<int> stack;
    for (int v : ai) {
        if (removed[static_cast<std::size_t>(v)]) continue;
        reached[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
    }
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int u = 0; u < n; ++u) {
            if (adj[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] &&
                !reached[static_cast<std::size_t>(u)]) {
                reached[static_cast<std::size_t>(u)] = 1;
                stack.push_back(u);
            }
        }
    }
    for (int v : bi)
        if (reached[static_cast<std::size_t>(v)]) return false;
    return true;
}

bool rule2_condition(const CausalDag& dag,
                     const std::vector<std::string>& y,
                     const std::vector<std::string>& z,
                     const std::vector<std::string>& x,
                     const std::vector<std::string>& w) {
    require_disjoint({resolve(dag, y), resolve(dag, z), resolve(dag, x), resolve(dag, w)});
    CausalDag g = dag;
    for (const auto& name : x) g = cut_edges(g, name, CutMode::incoming);
    for (const auto& name : z) g = cut_edges(g, name, CutMode::outgoing);
    std::vector<std::string> given = x;
    given.insert(given.end(), w.begin(), w.end());
    return d_separated(g, y, z, given);
}

void NodeRoleSpec::validate(const CausalDag& dag) const {
    std::vector<std::vector<int>> groups;
    groups.push_back({dag.index_of(cause)});
    groups.push_back({dag.index_of(effect)});
    groups.push_back(resolve(dag, mediators));
    groups.push_back(resolve(dag, observed_covariates));
    if (cause == effect) fail(Errc::role_mismatch, "cause and effect must differ");
    require_disjoint(groups);
}

namespace {

// The identifiability result is proven for the mediation pattern: edges among
// {cause, mediators, effect} limited to cause->mediator, mediator->effect and
// cause->effect, and no edge from that trio into a covariate.
bool matches_mediation_shape(const CausalDag& dag, const NodeRoleSpec& roles) {
    const int x = dag.index_of(roles.cause);
    const int y = dag.index_of(roles.effect);
    std::unordered_set<int> med;
    for (const auto& m : roles.mediators) med.insert(dag.index_of(m));

    for (const auto& [f, t] : dag.edges()) {
        const bool f_core = f == x || f == y || med.count(f) > 0;
        const bool t_core = t == x || t == y || med.count(t) > 0;
        if (f_core && !t_core) return false;  // core node feeding a covariate
        if (f_core && t_core) {
            const bool ok = (f == x && med.count(t) > 0) || (f == x && t == y) ||
                            (med.count(f) > 0 && t == y);
            if (!ok) return false;
        }
    }
    return true;
}

// Enumerate subsets of `pool` ordered by size then lexicographically by
// declaration position, calling fn until it returns true. Returns the subset
// that satisfied fn, if any.
std::optional<std::vector<int>> first_subset(const std::vector<int>& pool,
                                             long& counter,
                                             const std::function<bool(const std::vector<int>&)>& fn) {
    const int m = static_cast<int>(pool.size());
    for (int size = 0; size <= m; ++size) {
        std::vector<int> pick(static_cast<std::size_t>(size));
        // standard lexicographic combinations of indices into pool
        std::vector<int> idx(static_cast<std::size_t>(size));
        for (int i = 0; i < size; ++i) idx[static_cast<std::size_t>(i)] = i;
        for (;;) {
            for (int i = 0; i < size; ++i)
                pick[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
            ++counter;
            if (fn(pick)) return pick;
            int i = size - 1;
            while (i >= 0 && idx[static_cast<std::size_t>(i)] == m - size + i) --i;
            if (i < 0) break;
            ++idx[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < size; ++j)
                idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    return std::nullopt;
}

}  // namespace

IdentifiabilityReport check_identifiability(const CausalDag& dag, const NodeRoleSpec& roles) {
    roles.validate(dag);
    if (roles.observed_covariates.size() > 16)
        fail(Errc::too_many_covariates, "subset search is bounded at 16 observed covariates");

    const CausalDag cut = cut_edges(dag, roles.cause, CutMode::outgoing);
    std::vector<int> pool;
    for (const auto& u : roles.observed_covariates) pool.push_back(dag.index_of(u));

    auto names_of = [&](const std::vector<int>& idxs) {
        std::vector<std::string> out;
        for (int i : idxs) out.push_back(dag.node(i).name);
        return out;
    };

    IdentifiabilityReport report;
    auto blocks = [&](const std::vector<int>& subset, const std::vector<std::string>& other) {
        return d_separated(cut, {roles.cause}, other, names_of(subset));
    };

    auto u1 = first_subset(pool, report.checked_subsets,
                           [&](const std::vector<int>& s) { return blocks(s, {roles.effect}); });
    std::optional<std::vector<int>> u2;
    if (!roles.mediators.empty()) {
        u2 = first_subset(pool, report.checked_subsets,
                          [&](const std::vector<int>& s) { return blocks(s, roles.mediators); });
    }

    report.identifiable = u1.has_value() && (roles.mediators.empty() || u2.has_value());
    if (u1) report.witness_u1 = names_of(*u1);
    if (u2) report.witness_u2 = names_of(*u2);
    if (!matches_mediation_shape(dag, roles))
        report.shape_caveat =
            "graph/role shape is not the plain mediation pattern; the identifiability "
            "conclusion is heuristic here";
    return report;
}

}  // namespace sce::graph
