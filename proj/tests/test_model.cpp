#include <doctest.h>

#include <cmath>
#include <map>

#include "sce/model.hpp"
#include "test_support.hpp"

using namespace sce;
using model::CausalModel;
using model::Cpt;
using model::Intervention;
using graph::CausalDag;
using testsupport::bernoulli_kl;

namespace {

CausalModel single_bern(double alpha) {
    CausalDag dag({{"X", {"0", "1"}}}, {});
    std::vector<Cpt> cpts;
    cpts.emplace_back("X", std::vector<std::string>{}, 2, std::vector<double>{1 - alpha, alpha});
    return CausalModel(std::move(dag), std::move(cpts));
}

CausalModel confounded_model() {
    CausalDag dag({{"U", {"0", "1"}}, {"X", {"0", "1"}}, {"Y", {"0", "1"}}},
                  {{"U", "X"}, {"U", "Y"}});
    std::vector<Cpt> cpts;
    cpts.emplace_back("U", std::vector<std::string>{}, 2, std::vector<double>{0.4, 0.6});
    cpts.emplace_back("X", std::vector<std::string>{"U"}, 2, std::vector<double>{0.8, 0.2, 0.3, 0.7});
    cpts.emplace_back("Y", std::vector<std::string>{"U"}, 2, std::vector<double>{0.9, 0.1, 0.2, 0.8});
    return CausalModel(std::move(dag), std::move(cpts));
}

}  // namespace

TEST_CASE("joint distribution") {
    SUBCASE("single node") {
        const auto joint = model::joint_distribution(single_bern(0.3));
        CHECK(joint.probs() == std::vector<double>{0.7, 0.3});
    }
    SUBCASE("chain factorization by hand") {
        const auto joint = model::joint_distribution(testsupport::chain_model(0.1));
        CHECK(joint.event_probability({{"X", "0"}, {"Z", "0"}, {"Y", "0"}}) ==
              doctest::Approx(0.405).epsilon(1e-12));
    }
    SUBCASE("two-node fixture marginal") {
        const auto joint = model::joint_distribution(testsupport::example1_model());
        CHECK(joint.pmf_of("Y")[1] == doctest::Approx(0.2).epsilon(1e-12));
    }
    SUBCASE("marginals reproduce every cpt row with positive parent mass") {
        for (uint64_t seed = 1; seed <= 25; ++seed) {
            const auto m = testsupport::random_mediation_model(seed);
            const auto joint = model::joint_distribution(m);
            // p(Y | X=x, Z=z) must equal the stored row
            const auto& dag = m.dag();
            const auto& ycpt = m.cpt(dag.index_of("Y"));
            for (std::size_t x = 0; x < dag.node(0).states.size(); ++x)
                for (std::size_t z = 0; z < dag.node(1).states.size(); ++z) {
                    const auto conditional =
                        joint.condition({{"X", dag.node(0).states[x]}, {"Z", dag.node(1).states[z]}})
                            .pmf_of("Y");
                    const std::size_t row = x * dag.node(1).states.size() + z;
                    for (std::size_t y = 0; y < conditional.size(); ++y)
                        CHECK(conditional[y] ==
                              doctest::Approx(ycpt.at(row, static_cast<int>(y))).epsilon(1e-9));
                }
        }
    }
}

TEST_CASE("intervention") {
    const auto chain = testsupport::chain_model(0.1);
    SUBCASE("truncation pins the node and keeps downstream rows") {
        const auto cut = model::intervene(chain, {{{"Z", "1"}}});
        const auto joint = model::joint_distribution(cut);
        CHECK(joint.pmf_of("Z")[1] == doctest::Approx(1.0));
        CHECK(joint.condition({{"Z", "1"}}).pmf_of("Y")[1] == doctest::Approx(0.9).epsilon(1e-12));
    }
    SUBCASE("intervening a root matches observing it") {
        for (const auto& x : {"0", "1"}) {
            const auto by_do = model::query(chain, {"Y"}, {{{"X", x}}}, {}).pmf();
            const auto by_obs = model::query(chain, {"Y"}, {}, {{"X", x}}).pmf();
            for (std::size_t i = 0; i < by_do.size(); ++i)
                CHECK(by_do[i] == doctest::Approx(by_obs[i]).epsilon(1e-9));
        }
    }
    SUBCASE("confounder: do(X) severs the backdoor") {
        const auto m = confounded_model();
        // oracle: truncated enumeration gives p(Y=1) = sum_u p(u) p(Y=1|u)
        const double expected = 0.4 * 0.1 + 0.6 * 0.8;
        for (const auto& x : {"0", "1"}) {
            const auto dist = model::query(m, {"Y"}, {{{"X", x}}}, {}).pmf();
            CHECK(dist[1] == doctest::Approx(expected).epsilon(1e-12));
        }
    }
    SUBCASE("order independent across disjoint assignments") {
        const auto cu = testsupport::caused_uncertainty_model();
        const auto ab = model::joint_distribution(model::intervene(cu, {{{"X", "1"}, {"Z", "0"}}}));
        const auto ba = model::joint_distribution(model::intervene(cu, {{{"Z", "0"}, {"X", "1"}}}));
        for (std::size_t i = 0; i < ab.probs().size(); ++i)
            CHECK(ab.probs()[i] == doctest::Approx(ba.probs()[i]).epsilon(1e-15));
    }
    SUBCASE("unknown node and state rejected") {
        CHECK_THROWS_AS(model::intervene(chain, {{{"Q", "1"}}}), Error);
        CHECK_THROWS_AS(model::intervene(chain, {{{"Z", "2"}}}), Error);
    }
}

TEST_CASE("query") {
    const double eps = 0.1;
    const auto chain = testsupport::chain_model(eps);
    SUBCASE("chain interventional closed form") {
        const auto dist = model::query(chain, {"Y"}, {{{"X", "1"}}}, {}).pmf();
        CHECK(dist[1] == doctest::Approx(1 - 2 * eps * (1 - eps)).epsilon(1e-12));
    }
    SUBCASE("no intervention or observation gives the marginal") {
        const auto dist = model::query(chain, {"Y"}).pmf();
        CHECK(dist[1] == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("caused-uncertainty observational conditional") {
        const auto cu = testsupport::caused_uncertainty_model();
        const auto dist = model::query(cu, {"Y"}, {}, {{"X", "0"}}).pmf();
        CHECK(dist[1] == doctest::Approx(0.14).epsilon(1e-12));
    }
    SUBCASE("zero-probability observation throws") {
        CausalDag dag({{"X", {"0", "1"}}, {"Y", {"0", "1"}}}, {{"X", "Y"}});
        std::vector<Cpt> cpts;
        cpts.emplace_back("X", std::vector<std::string>{}, 2, std::vector<double>{1.0, 0.0});
        cpts.emplace_back("Y", std::vector<std::string>{"X"}, 2,
                          std::vector<double>{0.5, 0.5, 0.5, 0.5});
        const CausalModel m(std::move(dag), std::move(cpts));
        CHECK_THROWS_AS(model::query(m, {"Y"}, {}, {{"X", "1"}}), Error);
    }
}

TEST_CASE("post-cutting distribution") {
    SUBCASE("empty cut set is the plain joint") {
        const auto m = testsupport::caused_uncertainty_model();
        const auto a = model::joint_distribution(m);
        const auto b = model::post_cutting(m, {});
        CHECK(a.probs() == b.probs());
    }
    SUBCASE("cutting the only edge marginalizes the child") {
        const auto m = testsupport::example1_model();
        const auto cut = model::post_cutting(m, {{"X", "Y"}});
        for (const auto& x : {"0", "1"}) {
            const auto dist = cut.condition({{"X", x}}).pmf_of("Y");
            CHECK(dist[1] == doctest::Approx(0.2).epsilon(1e-12));
        }
    }
    SUBCASE("caused-uncertainty cut strengths match the conditional MIs") {
        const auto m = testsupport::caused_uncertainty_model();
        const auto joint = model::joint_distribution(m);
        const double cs_xy =
            prob::kl_divergence(joint, model::post_cutting(m, {{"X", "Y"}})).value();
        const double cs_zy =
            prob::kl_divergence(joint, model::post_cutting(m, {{"Z", "Y"}})).value();
        CHECK(cs_xy == doctest::Approx(0.48).epsilon(0.011));
        CHECK(cs_zy == doctest::Approx(0.06).epsilon(0.09));
        CHECK(cs_xy ==
              doctest::Approx(prob::mutual_information(joint, {"X"}, {"Y"}, {"Z"}).value())
                  .epsilon(1e-12));
        CHECK(cs_zy ==
              doctest::Approx(prob::mutual_information(joint, {"Z"}, {"Y"}, {"X"}).value())
                  .epsilon(1e-12));
    }
    SUBCASE("unknown edge rejected") {
        const auto m = testsupport::chain_model(0.1);
        CHECK_THROWS_AS(model::post_cutting(m, {{"X", "Y"}}), Error);
    }
}

TEST_CASE("ancestral sampling") {
    SUBCASE("point-mass model repeats one row") {
        CausalDag dag({{"X", {"a", "b"}}}, {});
        std::vector<Cpt> cpts;
        cpts.emplace_back("X", std::vector<std::string>{}, 2, std::vector<double>{0.0, 1.0});
        const CausalModel m(std::move(dag), std::move(cpts));
        const auto d = model::sample(m, 50, 3);
        for (std::size_t row = 0; row < d.row_count(); ++row) CHECK(d.cells(0)[row] == 1);
    }
    SUBCASE("law of large numbers at a fixed seed") {
        const auto d = model::sample(single_bern(0.3), 100000, 7);
        long ones = 0;
        for (int v : d.cells(0)) ones += v;
        CHECK(std::abs(ones / 1e5 - 0.3) < 0.01);
    }
    SUBCASE("same seed, same data; prefixes agree across batch sizes") {
        const auto m = testsupport::caused_uncertainty_model();
        const auto a = model::sample(m, 200, 99);
        const auto b = model::sample(m, 200, 99);
        const auto prefix = model::sample(m, 120, 99);
        for (std::size_t c = 0; c < a.column_count(); ++c) {
            CHECK(a.cells(static_cast<int>(c)) == b.cells(static_cast<int>(c)));
            for (std::size_t row = 0; row < prefix.row_count(); ++row)
                CHECK(prefix.cells(static_cast<int>(c))[row] == a.cells(static_cast<int>(c))[row]);
        }
    }
    SUBCASE("seed changes the draw") {
        const auto m = testsupport::caused_uncertainty_model();
        const auto a = model::sample(m, 200, 1);
        const auto b = model::sample(m, 200, 2);
        bool any_difference = false;
        for (std::size_t c = 0; c < a.column_count(); ++c)
            if (a.cells(static_cast<int>(c)) != b.cells(static_cast<int>(c))) any_difference = true;
        CHECK(any_difference);
    }
    SUBCASE("empirical cells approach the model joint") {
        const auto m = testsupport::random_mediation_model(4);
        const auto joint = model::joint_distribution(m);
        const auto d = model::sample(m, 1000000, 11);
        std::map<std::vector<int>, long> counts;
        for (std::size_t row = 0; row < d.row_count(); ++row)
            ++counts[{d.cells(0)[row], d.cells(1)[row], d.cells(2)[row]}];
        std::vector<int> states;
        for (std::size_t cell = 0; cell < joint.cell_count(); ++cell) {
            joint.decode(cell, states);
            const double freq =
                static_cast<double>(counts[states]) / static_cast<double>(d.row_count());
            CHECK(std::abs(freq - joint.probs()[cell]) < 0.005);
        }
    }
}
