#include "sce/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sce/rng.hpp"

namespace sce::model {

namespace {

constexpr std::size_t kMaxJointCells = 10'000'000;
constexpr double kNormTolerance = 1e-9;

}  // namespace

Cpt::Cpt(std::string child, std::vector<std::string> parents, std::size_t child_cardinality,
         std::vector<double> row_major_probs)
    : child_(std::move(child)),
      parents_(std::move(parents)),
      child_card_(child_cardinality),
      values_(std::move(row_major_probs)) {
    if (child_card_ == 0) fail(Errc::validation_error, "cpt with zero child states");
    if (values_.empty() || values_.size() % child_card_ != 0)
        fail(Errc::validation_error, "cpt for '" + child_ + "' has a partial row");
    rows_ = values_.size() / child_card_;
    for (std::size_t r = 0; r < rows_; ++r) {
        double total = 0.0;
        for (std::size_t s = 0; s < child_card_; ++s) {
            const double p = values_[r * child_card_ + s];
            if (std::isnan(p) || p < 0.0)
                fail(Errc::validation_error,
                     "cpt for '" + child_ + "' row " + std::to_string(r) + " has a bad probability");
            total += p;
        }
        if (std::abs(total - 1.0) > kNormTolerance)
            fail(Errc::validation_error, "cpt for '" + child_ + "' row " + std::to_string(r) +
                                             " sums to " + std::to_string(total));
    }
}

CausalModel::CausalModel(graph::CausalDag dag, std::vector<Cpt> cpts) : dag_(std::move(dag)) {
    if (cpts.size() != dag_.node_count())
        fail(Errc::validation_error, "model needs one cpt per node");
    cpts_.reserve(cpts.size());
    cpt_parents_.resize(dag_.node_count());
    // align CPTs with node declaration order
    for (std::size_t i = 0; i < dag_.node_count(); ++i) {
        const auto& name = dag_.node(static_cast<int>(i)).name;
        auto it = std::find_if(cpts.begin(), cpts.end(),
                               [&](const Cpt& c) { return c.child() == name; });
        if (it == cpts.end()) fail(Errc::validation_error, "no cpt for node '" + name + "'");
        cpts_.push_back(std::move(*it));
        cpts.erase(it);
    }
    for (std::size_t i = 0; i < dag_.node_count(); ++i) {
        const Cpt& c = cpts_[i];
        const int node = static_cast<int>(i);
        if (c.child_cardinality() != dag_.node(node).states.size())
            fail(Errc::validation_error, "cpt cardinality mismatch for '" + c.child() + "'");
        std::vector<int> pidx;
        std::size_t expected_rows = 1;
        std::set<int> declared;
        for (const auto& pname : c.parents()) {
            const int p = dag_.index_of(pname);
            if (!declared.insert(p).second)
                fail(Errc::validation_error, "cpt for '" + c.child() + "' repeats parent '" + pname + "'");
            if (!dag_.has_edge(p, node))
                fail(Errc::validation_error,
                     "cpt for '" + c.child() + "' names non-parent '" + pname + "'");
            pidx.push_back(p);
            expected_rows *= dag_.node(p).states.size();
        }
        if (declared.size() != dag_.parents(node).size())
            fail(Errc::validation_error, "cpt for '" + c.child() + "' misses a parent edge");
        if (c.row_count() != expected_rows)
            fail(Errc::validation_error, "cpt for '" + c.child() + "' has " +
                                             std::to_string(c.row_count()) + " rows, expected " +
                                             std::to_string(expected_rows));
        cpt_parents_[i] = std::move(pidx);
    }
}

namespace {

std::size_t joint_cell_count(const graph::CausalDag& dag) {
    std::size_t cells = 1;
    for (std::size_t i = 0; i < dag.node_count(); ++i) {
        const std::size_t card = dag.node(static_cast<int>(i)).states.size();
        if (cells > kMaxJointCells / card)
            fail(Errc::state_space_too_large, "joint state space exceeds 1e7 cells");
        cells *= card;
    }
    return cells;
}

std::size_t cpt_row_of(const CausalModel& m, int node, const std::vector<int>& config) {
    std::size_t row = 0;
    for (int p : m.cpt_parent_indices(node)) {
        row = row * m.dag().node(p).states.size() + static_cast<std::size_t>(config[static_cast<std::size_t>(p)]);
    }
    return row;
}

}  // namespace

prob::JointTable joint_distribution(const CausalModel& m) {
    const auto& dag = m.dag();
    const std::size_t cells = joint_cell_count(dag);
    const std::size_t n = dag.node_count();

    std::vector<prob::JointVar> vars;
    vars.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        vars.push_back({dag.node(static_cast<int>(i)).name, dag.node(static_cast<int>(i)).states});

    std::vector<double> probs(cells, 0.0);
    std::vector<int> config(n, 0);
    for (std::size_t cell = 0;; ++cell) {
        double p = 1.0;
        for (std::size_t i = 0; i < n && p > 0.0; ++i) {
            const int node = static_cast<int>(i);
            p *= m.cpt(node).at(cpt_row_of(m, node, config), config[i]);
        }
        probs[cell] = p;

        std::size_t k = n;
        while (k-- > 0) {
            if (++config[k] < static_cast<int>(dag.node(static_cast<int>(k)).states.size())) break;
            config[k] = 0;
        }
        if (k == static_cast<std::size_t>(-1)) break;
    }
    return prob::JointTable(std::move(vars), std::move(probs));
}

CausalModel intervene(const CausalModel& m, const Intervention& iv) {
    const auto& dag = m.dag();
    std::set<int> assigned;
    std::vector<std::pair<int, int>> pinned;  // node, state
    for (const auto& [name, label] : iv.assignments) {
        const int node = dag.index_of(name);
        if (!assigned.insert(node).second)
            fail(Errc::validation_error, "node '" + name + "' intervened twice");
        pinned.push_back({node, dag.state_index(node, label)});
    }

    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& [f, t] : dag.edges())
        if (assigned.count(t) == 0) edges.push_back({dag.node(f).name, dag.node(t).name});
    graph::CausalDag cut_dag(dag.nodes(), std::move(edges));

    std::vector<Cpt> cpts;
    for (std::size_t i = 0; i < dag.node_count(); ++i) {
        const int node = static_cast<int>(i);
        if (assigned.count(node)) {
            const std::size_t card = dag.node(node).states.size();
            std::vector<double> row(card, 0.0);
            for (const auto& [pn, ps] : pinned)
                if (pn == node) row[static_cast<std::size_t>(ps)] = 1.0;
            cpts.emplace_back(dag.node(node).name, std::vector<std::string>{}, card, std::move(row));
        } else {
            cpts.push_back(m.cpt(node));
        }
    }
    return CausalModel(std::move(cut_dag), std::move(cpts));
}

prob::JointTable query(const CausalModel& m, const std::vector<std::string>& target,
                       const Intervention& interventions,
                       const std::vector<std::pair<std::string, std::string>>& observations) {
    std::set<std::string> fixed;
    for (const auto& [n, s] : interventions.assignments) fixed.insert(n);
    for (const auto& [n, s] : observations)
        if (!fixed.insert(n).second)
            fail(Errc::overlapping_sets, "'" + n + "' both intervened and observed");
    for (const auto& t : target)
        if (fixed.count(t))
            fail(Errc::overlapping_sets, "target '" + t + "' is intervened or observed");

    const CausalModel& base = m;
    prob::JointTable joint =
        interventions.assignments.empty() ? joint_distribution(base)
                                          : joint_distribution(intervene(base, interventions));
    if (!observations.empty()) joint = joint.condition(observations);
    return joint.marginal(target);
}

prob::JointTable post_cutting(const CausalModel& m,
                              const std::vector<std::pair<std::string, std::string>>& cut) {
    const auto& dag = m.dag();
    std::set<std::pair<int, int>> cut_set;
    for (const auto& [fn, tn] : cut) {
        const int f = dag.index_of(fn);
        const int t = dag.index_of(tn);
        if (!dag.has_edge(f, t)) fail(Errc::unknown_edge, fn + " -> " + tn + " is not an edge");
        cut_set.insert({f, t});
    }
    if (cut_set.empty()) return joint_distribution(m);

    // source marginals come from the uncut model
    const prob::JointTable base_joint = joint_distribution(m);
    std::vector<std::vector<double>> marginals(dag.node_count());
    for (const auto& [f, t] : cut_set) {
        auto& mg = marginals[static_cast<std::size_t>(f)];
        if (mg.empty()) mg = base_joint.pmf_of(dag.node(f).name).probs();
    }

    std::vector<std::pair<std::string, std::string>> kept_edges;
    for (const auto& [f, t] : dag.edges())
        if (!cut_set.count({f, t})) kept_edges.push_back({dag.node(f).name, dag.node(t).name});
    graph::CausalDag cut_dag(dag.nodes(), kept_edges);

    std::vector<Cpt> cpts;
    for (std::size_t i = 0; i < dag.node_count(); ++i) {
        const int node = static_cast<int>(i);
        const Cpt& orig = m.cpt(node);
        const auto& all_parents = m.cpt_parent_indices(node);
        std::vector<int> kept, severed;  // positions into the original parent list
        for (std::size_t k = 0; k < all_parents.size(); ++k) {
            if (cut_set.count({all_parents[k], node}))
                severed.push_back(static_cast<int>(k));
            else
                kept.push_back(static_cast<int>(k));
        }
        if (severed.empty()) {
            cpts.push_back(orig);
            continue;
        }

        std::vector<std::string> kept_names;
        std::size_t kept_rows = 1;
        for (int k : kept) {
            kept_names.push_back(orig.parents()[static_cast<std::size_t>(k)]);
            kept_rows *= dag.node(all_parents[static_cast<std::size_t>(k)]).states.size();
        }
        const std::size_t card = orig.child_cardinality();
        std::vector<double> values(kept_rows * card, 0.0);

        // enumerate full parent configurations; fold severed parents against
        // the product of their marginals
        std::vector<int> config(all_parents.size(), 0);
        for (;;) {
            std::size_t full_row = 0;
            for (std::size_t k = 0; k < all_parents.size(); ++k)
                full_row = full_row * dag.node(all_parents[k]).states.size() +
                           static_cast<std::size_t>(config[k]);
            double weight = 1.0;
            for (int k : severed)
                weight *= marginals[static_cast<std::size_t>(all_parents[static_cast<std::size_t>(k)])]
                                   [static_cast<std::size_t>(config[static_cast<std::size_t>(k)])];
            std::size_t kept_row = 0;
            for (int k : kept)
                kept_row = kept_row * dag.node(all_parents[static_cast<std::size_t>(k)]).states.size() +
                           static_cast<std::size_t>(config[static_cast<std::size_t>(k)]);
            for (std::size_t s = 0; s < card; ++s)
                values[kept_row * card + s] += weight * orig.at(full_row, static_cast<int>(s));

            std::size_t k = all_parents.size();
            while (k-- > 0) {
                if (++config[k] <
                    static_cast<int>(dag.node(all_parents[k]).states.size()))
                    break;
                config[k] = 0;
            }
            if (k == static_cast<std::size_t>(-1)) break;
        }
        cpts.emplace_back(orig.child(), std::move(kept_names), card, std::move(values));
    }
    return joint_distribution(CausalModel(std::move(cut_dag), std::move(cpts)));
}

Dataset sample(const CausalModel& m, std::size_t n, uint64_t seed) {
    if (n == 0) fail(Errc::validation_error, "sample size must be at least 1");
    const auto& dag = m.dag();
    const auto topo = dag.topological_order();
    const std::size_t nodes = dag.node_count();

    std::vector<std::vector<int>> cells(nodes, std::vector<int>(n, 0));
    std::vector<int> config(nodes, 0);
    for (std::size_t row = 0; row < n; ++row) {
        rng::Substream stream(seed);
        stream.fold(static_cast<uint64_t>(row));
        for (int node : topo) {
            const double u = stream.next_double();
            const Cpt& c = m.cpt(node);
            const std::size_t r = cpt_row_of(m, node, config);
            const std::size_t card = c.child_cardinality();
            double acc = 0.0;
            int state = static_cast<int>(card) - 1;
            for (std::size_t s = 0; s < card; ++s) {
                acc += c.at(r, static_cast<int>(s));
                if (u < acc) {
                    state = static_cast<int>(s);
                    break;
                }
            }
            config[static_cast<std::size_t>(node)] = state;
        }
        for (std::size_t i = 0; i < nodes; ++i) cells[i][row] = config[i];
    }

    std::vector<DatasetColumn> columns;
    for (std::size_t i = 0; i < nodes; ++i)
        columns.push_back({dag.node(static_cast<int>(i)).name, dag.node(static_cast<int>(i)).states});
    return Dataset(std::move(columns), std::move(cells));
}

}  // namespace sce::model
