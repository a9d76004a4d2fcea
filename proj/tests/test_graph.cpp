#include <doctest.h>

#include <set>

#include "sce/dag.hpp"
#include "test_support.hpp"

using namespace sce;
using graph::CausalDag;
using graph::CutMode;

namespace {

CausalDag chain_dag() {
    return CausalDag({{"X", {"0", "1"}}, {"Z", {"0", "1"}}, {"Y", {"0", "1"}}},
                     {{"X", "Z"}, {"Z", "Y"}});
}

CausalDag climate_dag() {
    return testsupport::mediation_dag();
}

}  // namespace

TEST_CASE("topological sort") {
    SUBCASE("chain has the unique order") {
        const auto order = chain_dag().topological_order();
        CHECK(order == std::vector<int>{0, 1, 2});
    }
    SUBCASE("edgeless graph keeps declaration order") {
        CausalDag dag({{"A", {"0", "1"}}, {"B", {"0", "1"}}}, {});
        CHECK(dag.topological_order() == std::vector<int>{0, 1});
    }
    SUBCASE("cycles are rejected at construction") {
        CHECK_THROWS_AS(CausalDag({{"X", {"0", "1"}}, {"Y", {"0", "1"}}},
                                  {{"X", "Y"}, {"Y", "X"}}),
                        Error);
        try {
            CausalDag({{"X", {"0", "1"}}, {"Y", {"0", "1"}}}, {{"X", "Y"}, {"Y", "X"}});
        } catch (const Error& e) {
            CHECK(e.code() == Errc::cyclic_graph);
        }
    }
}

TEST_CASE("edge cutting") {
    const auto dag = chain_dag();
    SUBCASE("outgoing cut at Z leaves only X->Z") {
        const auto cut = graph::cut_edges(dag, "Z", CutMode::outgoing);
        CHECK(cut.edges().size() == 1);
        CHECK(cut.has_edge(0, 1));
    }
    SUBCASE("incoming cut at a root changes nothing") {
        const auto cut = graph::cut_edges(dag, "X", CutMode::incoming);
        CHECK(cut.edges().size() == dag.edges().size());
    }
    SUBCASE("outgoing cut isolates the climate cause") {
        const auto cut = graph::cut_edges(climate_dag(), "E", CutMode::outgoing);
        CHECK(cut.edges().size() == 1);
        CHECK(cut.has_edge(cut.index_of("S"), cut.index_of("T")));
    }
    SUBCASE("unknown node") {
        CHECK_THROWS_AS(graph::cut_edges(dag, "Q", CutMode::incoming), Error);
    }
    SUBCASE("idempotent per node and mode, never adds edges") {
        for (uint64_t seed = 1; seed <= 20; ++seed) {
            const auto g = testsupport::random_dag(seed);
            for (std::size_t i = 0; i < g.node_count(); ++i) {
                for (auto mode : {CutMode::incoming, CutMode::outgoing}) {
                    const auto once = graph::cut_edges(g, g.node(static_cast<int>(i)).name, mode);
                    const auto twice = graph::cut_edges(once, g.node(static_cast<int>(i)).name, mode);
                    CHECK(once.edges() == twice.edges());
                    CHECK(once.edges().size() <= g.edges().size());
                    for (const auto& e : once.edges()) {
                        CHECK(std::find(g.edges().begin(), g.edges().end(), e) != g.edges().end());
                    }
                }
            }
        }
    }
}

TEST_CASE("d-separation on the named fixtures") {
    const auto chain = chain_dag();
    CHECK(graph::d_separated(chain, {"X"}, {"Y"}, {"Z"}));
    CHECK_FALSE(graph::d_separated(chain, {"X"}, {"Y"}, {}));

    CausalDag collider({{"X", {"0", "1"}}, {"Y", {"0", "1"}}, {"Z", {"0", "1"}}},
                       {{"X", "Y"}, {"Z", "Y"}});
    CHECK(graph::d_separated(collider, {"X"}, {"Z"}, {}));
    CHECK_FALSE(graph::d_separated(collider, {"X"}, {"Z"}, {"Y"}));

    const auto cut = graph::cut_edges(climate_dag(), "S", CutMode::outgoing);
    CHECK(graph::d_separated(cut, {"S"}, {"T"}, {"E"}));

    CHECK_THROWS_AS(graph::d_separated(chain, {"X"}, {"X"}, {}), Error);
    CHECK_THROWS_AS(graph::d_separated(chain, {"Q"}, {"Y"}, {}), Error);
}

TEST_CASE("d-separation agrees with the path-blocking oracle") {
    // every (a,b,c) split of every node set over 200 seeded DAGs
    long checked = 0;
    for (uint64_t seed = 1; seed <= 200; ++seed) {
        const auto dag = testsupport::random_dag(seed);
        const int n = static_cast<int>(dag.node_count());
        const long assignments = 1;
        long total = assignments;
        for (int i = 0; i < n; ++i) total *= 4;
        for (long mask = 0; mask < total; ++mask) {
            std::vector<int> a, b;
            std::set<int> c;
            long rem = mask;
            for (int v = 0; v < n; ++v) {
                switch (rem % 4) {
                    case 0: a.push_back(v); break;
                    case 1: b.push_back(v); break;
                    case 2: c.insert(v); break;
                    default: break;
                }
                rem /= 4;
            }
            if (a.empty() || b.empty()) continue;
            std::vector<std::string> an, bn, cn;
            for (int v : a) an.push_back(dag.node(v).name);
            for (int v : b) bn.push_back(dag.node(v).name);
            for (int v : c) cn.push_back(dag.node(v).name);
            const bool algorithmic = graph::d_separated(dag, an, bn, cn);
            const bool oracle = testsupport::oracle_d_separated(dag, a, b, c);
            REQUIRE_MESSAGE(algorithmic == oracle, "seed ", seed, " mask ", mask);
            // symmetry comes along for free on the same instances
            CHECK(graph::d_separated(dag, bn, an, cn) == algorithmic);
            ++checked;
        }
    }
    CHECK(checked > 10000);
}

TEST_CASE("rule 2 exchange conditions") {
    const auto climate = climate_dag();
    CHECK(graph::rule2_condition(climate, {"T"}, {"E"}, {}, {}));
    CHECK(graph::rule2_condition(climate, {"T"}, {"S"}, {}, {"E"}));

    CausalDag confounded({{"U", {"0", "1"}}, {"X", {"0", "1"}}, {"Y", {"0", "1"}}},
                         {{"U", "X"}, {"U", "Y"}});
    CHECK_FALSE(graph::rule2_condition(confounded, {"Y"}, {"X"}, {}, {}));
}

TEST_CASE("identifiability search") {
    SUBCASE("plain mediation needs no covariates") {
        graph::NodeRoleSpec roles{"E", "T", {"S"}, {}};
        const auto report = graph::check_identifiability(climate_dag(), roles);
        CHECK(report.identifiable);
        REQUIRE(report.witness_u1.has_value());
        CHECK(report.witness_u1->empty());
        REQUIRE(report.witness_u2.has_value());
        CHECK(report.witness_u2->empty());
        CHECK_FALSE(report.shape_caveat.has_value());
    }
    SUBCASE("unobserved confounder defeats the search") {
        CausalDag dag({{"U", {"0", "1"}}, {"X", {"0", "1"}}, {"Y", {"0", "1"}}},
                      {{"U", "X"}, {"U", "Y"}, {"X", "Y"}});
        graph::NodeRoleSpec roles{"X", "Y", {}, {}};
        const auto report = graph::check_identifiability(dag, roles);
        CHECK_FALSE(report.identifiable);
    }
    SUBCASE("observing the confounder gives the singleton witness") {
        CausalDag dag({{"U", {"0", "1"}}, {"X", {"0", "1"}}, {"Y", {"0", "1"}}},
                      {{"U", "X"}, {"U", "Y"}, {"X", "Y"}});
        graph::NodeRoleSpec roles{"X", "Y", {}, {"U"}};
        const auto report = graph::check_identifiability(dag, roles);
        CHECK(report.identifiable);
        REQUIRE(report.witness_u1.has_value());
        CHECK(*report.witness_u1 == std::vector<std::string>{"U"});
        // oracle: of the two subsets {} and {U}, only {U} blocks in the cut graph
        const auto cut = graph::cut_edges(dag, "X", CutMode::outgoing);
        CHECK_FALSE(graph::d_separated(cut, {"X"}, {"Y"}, {}));
        CHECK(graph::d_separated(cut, {"X"}, {"Y"}, {"U"}));
    }
    SUBCASE("covariate bound enforced") {
        std::vector<graph::NodeDef> nodes{{"X", {"0", "1"}}, {"Y", {"0", "1"}}};
        std::vector<std::string> covs;
        for (int i = 0; i < 17; ++i) {
            nodes.push_back({"U" + std::to_string(i), {"0", "1"}});
            covs.push_back("U" + std::to_string(i));
        }
        CausalDag dag(nodes, {{"X", "Y"}});
        graph::NodeRoleSpec roles{"X", "Y", {}, covs};
        CHECK_THROWS_AS(graph::check_identifiability(dag, roles), Error);
    }
    SUBCASE("fully observed mediation-shaped graphs are always identifiable") {
        for (uint64_t seed = 1; seed <= 40; ++seed) {
            // X -> Z -> Y mediation core plus covariates into each core node
            // and random covariate-covariate edges
            sce::rng::Substream stream(seed);
            stream.fold("mediation-shape");
            const int n_cov = 1 + static_cast<int>(stream.next_below(3));
            std::vector<graph::NodeDef> nodes{{"X", {"0", "1"}}, {"Z", {"0", "1"}}, {"Y", {"0", "1"}}};
            std::vector<std::pair<std::string, std::string>> edges{
                {"X", "Z"}, {"Z", "Y"}, {"X", "Y"}};
            std::vector<std::string> covs;
            for (int i = 0; i < n_cov; ++i) {
                const std::string u = "U" + std::to_string(i);
                nodes.push_back({u, {"0", "1"}});
                covs.push_back(u);
                for (const auto& core : {"X", "Z", "Y"})
                    if (stream.next_double() < 0.6) edges.push_back({u, core});
                for (int j = 0; j < i; ++j)
                    if (stream.next_double() < 0.3)
                        edges.push_back({"U" + std::to_string(j), u});
            }
            CausalDag dag(nodes, edges);
            graph::NodeRoleSpec roles{"X", "Y", {"Z"}, covs};
            const auto report = graph::check_identifiability(dag, roles);
            CHECK_MESSAGE(report.identifiable, "seed ", seed);
            CHECK_FALSE(report.shape_caveat.has_value());
        }
    }
    SUBCASE("non-mediation shapes carry the caveat") {
        // effect feeds a covariate
        CausalDag dag({{"X", {"0", "1"}}, {"Y", {"0", "1"}}, {"W", {"0", "1"}}},
                      {{"X", "Y"}, {"Y", "W"}});
        graph::NodeRoleSpec roles{"X", "Y", {}, {"W"}};
        const auto report = graph::check_identifiability(dag, roles);
        CHECK(report.shape_caveat.has_value());
    }
}

TEST_CASE("role spec validation") {
    const auto dag = climate_dag();
    graph::NodeRoleSpec bad{"E", "E", {}, {}};
    CHECK_THROWS_AS(bad.validate(dag), Error);
    graph::NodeRoleSpec overlap{"E", "T", {"S"}, {"S"}};
    CHECK_THROWS_AS(overlap.validate(dag), Error);
}
