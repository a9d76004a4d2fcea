#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sce/estimate.hpp"
#include "sce/io.hpp"
#include "sce/measures.hpp"
#include "test_support.hpp"

using namespace sce;
using nlohmann::json;
using testsupport::bernoulli_kl;

namespace {

const std::string kFixtures = SCE_FIXTURE_DIR;
const std::string kCli = SCE_CLI_PATH;

struct CliResult {
    int exit_code = -1;
    std::string output;
};

CliResult run_cli(const std::string& args) {
    const std::string command = kCli + " " + args + " 2>/dev/null";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult result;
    char buffer[4096];
    while (std::size_t got = std::fread(buffer, 1, sizeof(buffer), pipe))
        result.output.append(buffer, got);
    const int status = pclose(pipe);
    result.exit_code = WEXITSTATUS(status);
    return result;
}

std::string temp_path(const std::string& name) {
    return std::string("/tmp/sce_test_") + name;
}

}  // namespace

TEST_CASE("expression evaluation") {
    CHECK(io::eval_expression("0.25", {}) == 0.25);
    CHECK(io::eval_expression("1-$eps", {{"eps", 0.1}}) == doctest::Approx(0.9));
    CHECK(io::eval_expression("1-2*$e*(1-$e)", {{"e", 0.1}}) == doctest::Approx(0.82));
    CHECK(io::eval_expression("6/7", {}) == doctest::Approx(6.0 / 7.0).epsilon(1e-15));
    CHECK(io::eval_expression("-(2-3)", {}) == 1.0);
    CHECK_THROWS_AS(io::eval_expression("1-$missing", {}), Error);
    CHECK_THROWS_AS(io::eval_expression("1+", {}), Error);
    CHECK_THROWS_AS(io::eval_expression("(1", {}), Error);
}

TEST_CASE("model files") {
    SUBCASE("bundled two-node fixture") {
        const auto m = io::parse_model_file(kFixtures + "/example1.json");
        const auto joint = model::joint_distribution(m);
        CHECK(joint.pmf_of("Y")[1] == doctest::Approx(0.2).epsilon(1e-12));
    }
    SUBCASE("bundled relay fixture is parameterized") {
        const auto m = io::parse_model_file(kFixtures + "/chain.json", {{"eps", 0.1}});
        const auto joint = model::joint_distribution(m);
        CHECK(joint.event_probability({{"X", "0"}, {"Z", "0"}, {"Y", "0"}}) ==
              doctest::Approx(0.405).epsilon(1e-12));
        CHECK_THROWS_AS(io::parse_model_file(kFixtures + "/chain.json"), Error);
    }
    SUBCASE("bundled two-root fixture") {
        const auto m = io::parse_model_file(kFixtures + "/caused_uncertainty.json");
        const auto row = model::query(m, {"Y"}, {}, {{"X", "0"}, {"Z", "0"}}).pmf();
        CHECK(row[1] == doctest::Approx(0.1).epsilon(1e-12));
    }
    SUBCASE("bundled fixtures reproduce their reference values") {
        using measures::MeasureKind;
        using testsupport::make_spec;
        // relay fixture across the whole noise grid
        for (const double eps : {0.2, 0.1, 0.05, 0.01}) {
            const auto m = io::parse_model_file(kFixtures + "/chain.json", {{"eps", eps}});
            const double v =
                measures::ste(m, make_spec(MeasureKind::ste, "X", "Y", "1")).bits.value();
            CHECK(std::abs(v - bernoulli_kl(2 * eps * (1 - eps), 0.5)) < 1e-9);
        }
        // two-node fixture
        {
            const auto m = io::parse_model_file(kFixtures + "/example1.json");
            const auto smi = prob::specific_mi(model::joint_distribution(m), "X", "1", "Y");
            CHECK(std::abs(smi.i1.value() - 1.2) < 1e-9);
            CHECK(std::abs(smi.i2) < 1e-9);
        }
        // two-root fixture conditional table entry
        {
            const auto m = io::parse_model_file(kFixtures + "/caused_uncertainty.json");
            const double v = measures::ste(m, make_spec(MeasureKind::ste, "X", "Y", "0", {},
                                                        {{"Z", "0"}}))
                                 .bits.value();
            CHECK(std::abs(v - 0.53) < 0.005);
        }
        // inhibitor fixture matches the in-memory builder
        {
            const auto m =
                io::parse_model_file(kFixtures + "/shared_responsibility_n6.json", {{"eps", 0.01}});
            const auto reference = testsupport::shared_responsibility_model(6, 0.01);
            std::vector<std::pair<std::string, std::string>> cond;
            for (int i = 2; i <= 6; ++i) cond.push_back({"X" + std::to_string(i), "0"});
            const auto spec = make_spec(MeasureKind::ste, "X1", "Y", "1", {}, cond);
            const double parsed_value = measures::ste(m, spec).bits.value();
            const double built_value = measures::ste(reference, spec).bits.value();
            CHECK(parsed_value == doctest::Approx(built_value).epsilon(1e-12));
            CHECK(parsed_value > measures::ste(
                                     m, make_spec(MeasureKind::ste, "X1", "Y", "0", {}, cond))
                                     .bits.value());
        }
    }
    SUBCASE("a row that sums to 0.9 is named in the error") {
        json bad = {{"nodes",
                     {{{"name", "A"}, {"states", {"0", "1"}}, {"parents", json::array()},
                       {"cpt", {{0.5, 0.4}}}}}}};
        try {
            io::parse_model_json(bad);
            FAIL("expected a validation error");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::validation_error);
            const std::string what = e.what();
            CHECK(what.find("A") != std::string::npos);
            CHECK(what.find("0") != std::string::npos);
        }
    }
    SUBCASE("serialization round-trips the joint") {
        const auto m = testsupport::random_mediation_model(6);
        const auto restored = io::parse_model_json(io::model_to_json(m));
        const auto a = model::joint_distribution(m);
        const auto b = model::joint_distribution(restored);
        for (std::size_t i = 0; i < a.probs().size(); ++i)
            CHECK(a.probs()[i] == doctest::Approx(b.probs()[i]).epsilon(1e-15));
    }
}

TEST_CASE("dataset csv") {
    graph::CausalDag dag({{"A", {"x,1", "y"}}, {"B", {"0", "1"}}}, {});
    std::vector<std::vector<int>> cells{{0, 1, 0}, {1, 0, 1}};
    const Dataset d({{"A", {"x,1", "y"}}, {"B", {"0", "1"}}}, cells);

    const std::string path = temp_path("roundtrip.csv");
    {
        std::ofstream out(path, std::ios::binary);
        io::write_dataset_csv(out, d);
    }
    const auto back = io::read_dataset_csv(path, dag);
    REQUIRE(back.row_count() == 3);
    CHECK(back.cells(0) == cells[0]);
    CHECK(back.cells(1) == cells[1]);

    SUBCASE("unknown labels are rejected") {
        std::ofstream out(path, std::ios::binary);
        out << "A,B\nz,0\n";
        out.close();
        CHECK_THROWS_AS(io::read_dataset_csv(path, dag), Error);
    }
    SUBCASE("ragged rows are rejected") {
        std::ofstream out(path, std::ios::binary);
        out << "A,B\ny\n";
        out.close();
        CHECK_THROWS_AS(io::read_dataset_csv(path, dag), Error);
    }
}

TEST_CASE("report number rounding") {
    const double v = 0.21679928682692662;
    const double rounded = io::round12(v);
    CHECK(std::abs(rounded - v) < 1e-12);
    CHECK(io::round12(rounded) == rounded);  // idempotent, hence lossless in JSON
    const json j = rounded;
    CHECK(j.get<double>() == rounded);
    CHECK(io::number_or_inf(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("cli") {
    SUBCASE("compute on the relay fixture") {
        const auto result = run_cli("compute --model " + kFixtures +
                                    "/chain.json --define eps=0.1 --measure ste --cause X "
                                    "--value 0 --effect Y");
        REQUIRE(result.exit_code == 0);
        const json report = json::parse(result.output);
        const double expected = bernoulli_kl(2 * 0.1 * 0.9, 0.5);
        CHECK(std::abs(report["value_bits"].get<double>() - expected) < 1e-9);
        CHECK(report["measure"]["kind"] == "ste");
        // serialized numbers parse back to the rounded value exactly
        CHECK(report["value_bits"].get<double>() == io::round12(expected));
    }
    SUBCASE("dsep subcommand") {
        const auto result = run_cli("dsep --model " + kFixtures +
                                    "/chain.json --a X --b Y --given Z");
        REQUIRE(result.exit_code == 0);
        CHECK(json::parse(result.output)["d_separated"] == true);
    }
    SUBCASE("identify subcommand") {
        const auto result = run_cli("identify --model " + kFixtures +
                                    "/chain.json --cause X --effect Y --mediator Z");
        REQUIRE(result.exit_code == 0);
        CHECK(json::parse(result.output)["identifiability"]["identifiable"] == true);
    }
    SUBCASE("simulate then estimate, reproducibly") {
        const std::string csv = temp_path("sim.csv");
        const std::string csv2 = temp_path("sim2.csv");
        REQUIRE(run_cli("simulate --model " + kFixtures +
                        "/caused_uncertainty.json -n 20000 --seed 11 --output " + csv)
                    .exit_code == 0);
        REQUIRE(run_cli("simulate --model " + kFixtures +
                        "/caused_uncertainty.json -n 20000 --seed 11 --output " + csv2)
                    .exit_code == 0);
        std::ifstream a(csv), b(csv2);
        std::stringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        CHECK(sa.str() == sb.str());

        const auto est = run_cli("estimate --data " + csv + " --dag " + kFixtures +
                                 "/caused_uncertainty.json --measure ste --cause X --value 0 "
                                 "--effect Y --covariates Z --condition Z=0 --normalized");
        REQUIRE(est.exit_code == 0);
        const json report = json::parse(est.output);
        CHECK(std::abs(report["value_bits"].get<double>() - 0.531) < 0.05);
        CHECK(report["normalized"].get<double>() > 0.0);
        CHECK(report["identifiability"]["identifiable"] == true);
    }
    SUBCASE("pipeline subcommand") {
        const std::string series = temp_path("series.csv");
        {
            std::ofstream out(series);
            out << "day,value\n";
            for (int i = 0; i < 300; ++i) out << i << "," << (i % 3) << "\n";
        }
        const auto result = run_cli("pipeline --data " + series +
                                    " --block-days 10 --harmonics 2 --thresholds -0.5,0.5");
        REQUIRE(result.exit_code == 0);
        std::istringstream lines(result.output);
        std::string header;
        std::getline(lines, header);
        CHECK(header == "T");
        int count = 0;
        std::string line;
        while (std::getline(lines, line))
            if (!line.empty()) ++count;
        CHECK(count == 30);
    }
    SUBCASE("test subcommand fills the interval and threshold fields") {
        const std::string csv = temp_path("med.csv");
        REQUIRE(run_cli("simulate --model " + kFixtures +
                        "/caused_uncertainty.json -n 4000 --seed 3 --output " + csv)
                    .exit_code == 0);
        // a dag file with the direct and mediated links the analysis assumes
        const std::string dag_path = temp_path("med_dag.json");
        {
            std::ofstream out(dag_path);
            out << R"({"nodes":[
                {"name":"X","states":["0","1"],"parents":[]},
                {"name":"Z","states":["0","1"],"parents":["X"]},
                {"name":"Y","states":["0","1"],"parents":["X","Z"]}]})";
        }
        const auto result = run_cli("test --data " + csv + " --dag " + dag_path +
                                    " --measure snde --cause X --value 1 --effect Y --mediator Z "
                                    "--normalized --replicates 400 --seed 7 --alpha 0.05");
        REQUIRE(result.exit_code == 0);
        const json report = json::parse(result.output);
        REQUIRE(report.contains("ci"));
        CHECK(report["ci"].size() == 2);
        CHECK(report["ci"][0].get<double>() <= report["ci"][1].get<double>());
        CHECK(report.contains("null_threshold"));
        CHECK(report.contains("significant"));
        CHECK(report.contains("normalized"));
        CHECK(report["replicates"] == 400);
        CHECK(report["seed"] == 7);
    }
    SUBCASE("exit codes distinguish validation from statistics") {
        CHECK(run_cli("compute --model /nonexistent.json --measure ste --cause X --value 0 "
                      "--effect Y")
                  .exit_code == 2);
        // statistical failure: estimation gated by identifiability
        const std::string dag_path = temp_path("confounded.json");
        {
            std::ofstream out(dag_path);
            out << R"({"nodes":[
                {"name":"U","states":["0","1"],"parents":[]},
                {"name":"X","states":["0","1"],"parents":["U"]},
                {"name":"Y","states":["0","1"],"parents":["U","X"]}]})";
        }
        const std::string data_path = temp_path("confounded.csv");
        {
            std::ofstream out(data_path);
            out << "X,Y\n0,0\n0,1\n1,0\n1,1\n";
        }
        CHECK(run_cli("estimate --data " + data_path + " --dag " + dag_path +
                      " --measure ste --cause X --value 1 --effect Y")
                  .exit_code == 3);
    }
}
