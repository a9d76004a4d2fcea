#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "sce/estimate.hpp"
#include "sce/io.hpp"
#include "sce/stats.hpp"

namespace {

constexpr const char* kToolVersion = "0.1.0";

using nlohmann::json;
using sce::Errc;
using sce::Error;

struct MeasureFlags {
    std::string measure = "ste";
    std::string cause, effect, value;
    std::vector<std::string> mediators;
    std::string mediator_value;
    std::string covariates;  // comma separated
    std::vector<std::string> conditions;
    bool normalized = false;
    std::string local_baseline = "on";
};

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::pair<std::string, std::string> split_kv(const std::string& text, char sep) {
    const auto pos = text.find(sep);
    if (pos == std::string::npos || pos == 0 || pos + 1 == text.size())
        sce::fail(Errc::validation_error, "expected KEY" + std::string(1, sep) + "VALUE, got '" + text + "'");
    return {text.substr(0, pos), text.substr(pos + 1)};
}

void add_measure_flags(CLI::App* cmd, MeasureFlags& f) {
    cmd->add_option("--measure", f.measure, "ste|scde|snde|snie|if|cs")
        ->check(CLI::IsMember({"ste", "scde", "snde", "snie", "if", "cs"}));
    cmd->add_option("--cause", f.cause, "cause node")->required();
    cmd->add_option("--effect", f.effect, "effect node")->required();
    cmd->add_option("--value", f.value, "cause state (specific measures)");
    cmd->add_option("--mediator", f.mediators, "mediator node (repeatable)");
    cmd->add_option("--mediator-value", f.mediator_value, "held mediator state (scde)");
    cmd->add_option("--covariates", f.covariates, "observed covariates, comma separated");
    cmd->add_option("--condition", f.conditions, "covariate assignment NODE=STATE (repeatable)");
    cmd->add_flag("--normalized", f.normalized, "also report the normalized value");
    cmd->add_option("--local-baseline", f.local_baseline,
                    "weight the baseline by p(x'|u) (on) or p(x') (off)")
        ->check(CLI::IsMember({"on", "off"}));
}

sce::measures::MeasureSpec build_spec(const MeasureFlags& f) {
    sce::measures::MeasureSpec spec;
    if (f.measure == "ste") spec.kind = sce::measures::MeasureKind::ste;
    else if (f.measure == "scde") spec.kind = sce::measures::MeasureKind::scde;
    else if (f.measure == "snde") spec.kind = sce::measures::MeasureKind::snde;
    else if (f.measure == "snie") spec.kind = sce::measures::MeasureKind::snie;
    else if (f.measure == "cs") spec.kind = sce::measures::MeasureKind::causal_strength;
    else
        spec.kind = f.mediators.empty() ? sce::measures::MeasureKind::information_flow
                                        : sce::measures::MeasureKind::conditional_information_flow;

    spec.roles.cause = f.cause;
    spec.roles.effect = f.effect;
    spec.roles.mediators = f.mediators;
    spec.cause_value = f.value;
    if (!f.mediator_value.empty()) spec.mediator_value = f.mediator_value;
    for (const auto& c : f.conditions) spec.conditioning.push_back(split_kv(c, '='));
    spec.normalized = f.normalized;
    spec.local_baseline = f.local_baseline != "off";

    if (!f.covariates.empty()) {
        spec.roles.observed_covariates = split_commas(f.covariates);
    } else {
        for (const auto& [k, v] : spec.conditioning) spec.roles.observed_covariates.push_back(k);
    }
    const bool specific = spec.kind == sce::measures::MeasureKind::ste ||
                          spec.kind == sce::measures::MeasureKind::scde ||
                          spec.kind == sce::measures::MeasureKind::snde ||
                          spec.kind == sce::measures::MeasureKind::snie;
    if (specific && f.value.empty())
        sce::fail(Errc::validation_error, "--value is required for " + f.measure);
    return spec;
}

json spec_echo(const sce::measures::MeasureSpec& spec) {
    json j;
    j["kind"] = sce::measures::measure_kind_name(spec.kind);
    j["cause"] = spec.roles.cause;
    j["effect"] = spec.roles.effect;
    j["mediators"] = spec.roles.mediators;
    j["observed_covariates"] = spec.roles.observed_covariates;
    if (!spec.cause_value.empty()) j["cause_value"] = spec.cause_value;
    if (spec.mediator_value) j["mediator_value"] = *spec.mediator_value;
    json cond = json::object();
    for (const auto& [k, v] : spec.conditioning) cond[k] = v;
    j["conditioning"] = cond;
    j["normalized"] = spec.normalized;
    j["local_baseline"] = spec.local_baseline;
    return j;
}

json measure_value_json(const sce::measures::MeasureValue& value) {
    json j;
    j["value_bits"] = sce::io::number_or_inf(value.bits.value());
    if (value.normalized) j["normalized"] = sce::io::round12(*value.normalized);
    return j;
}

json identifiability_json(const sce::graph::IdentifiabilityReport& report) {
    json j;
    j["identifiable"] = report.identifiable;
    if (report.witness_u1) j["witness_u1"] = *report.witness_u1;
    if (report.witness_u2) j["witness_u2"] = *report.witness_u2;
    j["checked_subsets"] = report.checked_subsets;
    if (report.shape_caveat) j["caveat"] = *report.shape_caveat;
    return j;
}

void emit(const json& report, const std::string& output_path) {
    if (output_path.empty()) {
        std::cout << report.dump(2) << "\n";
        return;
    }
    std::ofstream out(output_path, std::ios::binary);
    if (!out) sce::fail(Errc::validation_error, "cannot write '" + output_path + "'");
    out << report.dump(2) << "\n";
}

sce::io::Defines parse_defines(const std::vector<std::string>& defines) {
    sce::io::Defines out;
    for (const auto& d : defines) {
        auto [k, v] = split_kv(d, '=');
        out.push_back({k, sce::io::eval_expression(v, {})});
    }
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"specific causal effect measures on discrete causal DAG models"};
    app.require_subcommand(1);

    std::string model_path, data_path, dag_path, output_path;
    std::vector<std::string> defines;
    MeasureFlags flags;
    uint64_t seed = 0;
    int replicates = 10000;
    double alpha = 0.05;
    int threads = 1;
    bool acknowledge = false;

    auto* compute = app.add_subcommand("compute", "exact measures on a model file");
    compute->add_option("--model", model_path, "model JSON")->required();
    compute->add_option("--define", defines, "substitute $NAME in the model (NAME=VALUE)");
    compute->add_option("--output", output_path, "report path (default stdout)");
    add_measure_flags(compute, flags);

    auto* estimate = app.add_subcommand("estimate", "plug-in estimation from a CSV dataset");
    estimate->add_option("--data", data_path, "dataset CSV")->required();
    estimate->add_option("--dag", dag_path, "graph JSON (cpt entries optional)")->required();
    estimate->add_option("--output", output_path, "report path (default stdout)");
    estimate->add_flag("--acknowledge-confounding", acknowledge,
                       "estimate even when unidentifiable; marks the report predictive");
    add_measure_flags(estimate, flags);

    auto* test = app.add_subcommand("test", "estimate with bootstrap CI and permutation H0 test");
    test->add_option("--data", data_path, "dataset CSV")->required();
    test->add_option("--dag", dag_path, "graph JSON")->required();
    test->add_option("--replicates", replicates, "bootstrap/permutation replicates");
    test->add_option("--seed", seed, "resampling seed")->required();
    test->add_option("--alpha", alpha, "CI tail mass and significance level");
    test->add_option("--threads", threads, "worker threads (result is thread-count independent)");
    test->add_option("--output", output_path, "report path (default stdout)");
    test->add_flag("--acknowledge-confounding", acknowledge);
    std::string break_link, group_by, shuffle_side = "cause";
    test->add_option("--break-link", break_link, "edge FROM,TO broken under H0 (default cause,effect)");
    test->add_option("--group-by", group_by, "column whose groups confine the shuffle");
    test->add_option("--shuffle", shuffle_side, "shuffle the cause or effect side of the link")
        ->check(CLI::IsMember({"cause", "effect"}));
    add_measure_flags(test, flags);

    auto* simulate = app.add_subcommand("simulate", "ancestral-sample a model to CSV");
    simulate->add_option("--model", model_path)->required();
    simulate->add_option("--define", defines, "substitute $NAME in the model (NAME=VALUE)");
    std::size_t rows = 0;
    simulate->add_option("-n,--rows", rows, "sample size")->required();
    simulate->add_option("--seed", seed, "sampling seed")->required();
    simulate->add_option("--output", output_path, "CSV path (default stdout)");

    auto* dsep = app.add_subcommand("dsep", "d-separation query");
    dsep->add_option("--model", model_path, "model or graph JSON")->required();
    std::string set_a, set_b, set_given;
    dsep->add_option("--a", set_a, "comma separated nodes")->required();
    dsep->add_option("--b", set_b, "comma separated nodes")->required();
    dsep->add_option("--given", set_given, "comma separated conditioning nodes");
    dsep->add_option("--output", output_path);

    auto* identify = app.add_subcommand("identify", "identifiability witness search");
    identify->add_option("--model", model_path, "model or graph JSON")->required();
    identify->add_option("--cause", flags.cause)->required();
    identify->add_option("--effect", flags.effect)->required();
    identify->add_option("--mediator", flags.mediators, "mediator node (repeatable)");
    identify->add_option("--covariates", flags.covariates, "observed covariates, comma separated");
    identify->add_option("--output", output_path);

    auto* pipeline = app.add_subcommand(
        "pipeline", "detrend, block-average and quantize a raw day,value series to a category column");
    pipeline->add_option("--data", data_path, "raw series CSV")->required();
    int block_days = 14, harmonics = 6;
    double period = 365.25;
    std::string thresholds, column_name = "T";
    pipeline->add_option("--block-days", block_days);
    pipeline->add_option("--harmonics", harmonics);
    pipeline->add_option("--period", period, "seasonal period in days");
    pipeline->add_option("--thresholds", thresholds, "LOW,HIGH cutpoints (default: empirical tertiles)");
    pipeline->add_option("--column", column_name, "output column name");
    pipeline->add_option("--output", output_path, "CSV path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    const auto defs = parse_defines(defines);

    if (*compute) {
        const auto model = sce::io::parse_model_file(model_path, defs);
        const auto spec = build_spec(flags);
        const auto value = sce::measures::evaluate(model, spec);
        json report;
        report["tool"] = "sce";
        report["version"] = kToolVersion;
        report["measure"] = spec_echo(spec);
        report.update(measure_value_json(value));
        emit(report, output_path);
        return 0;
    }

    if (*estimate) {
        const auto dag = sce::io::parse_dag_file(dag_path);
        const auto data = sce::io::read_dataset_csv(data_path, dag);
        const auto spec = build_spec(flags);
        sce::est::EstimateOptions opts;
        opts.acknowledge_confounding = acknowledge;
        const auto result = sce::est::estimate_measure(data, spec, dag, opts);
        json report;
        report["tool"] = "sce";
        report["version"] = kToolVersion;
        report["measure"] = spec_echo(spec);
        report.update(measure_value_json(result.value));
        report["identifiability"] = identifiability_json(result.gate);
        if (result.predictive_only) report["note"] = "predictive, not causal";
        json cells = json::array();
        for (const auto& c : result.conditionals)
            cells.push_back({{"conditional", c.description}, {"rows", c.rows}});
        report["estimated_from"] = cells;
        emit(report, output_path);
        return 0;
    }

    if (*test) {
        const auto dag = sce::io::parse_dag_file(dag_path);
        const auto data = sce::io::read_dataset_csv(data_path, dag);
        const auto spec = build_spec(flags);
        sce::est::EstimateOptions opts;
        opts.acknowledge_confounding = acknowledge;

        sce::stats::ResamplePlan plan;
        plan.replicates = replicates;
        plan.seed = seed;
        plan.ci_levels = {alpha, 1.0 - alpha};
        plan.null_cutoff = 1.0 - alpha;

        std::pair<std::string, std::string> link{spec.roles.cause, spec.roles.effect};
        if (!break_link.empty()) {
            const auto parts = split_commas(break_link);
            if (parts.size() != 2) sce::fail(Errc::validation_error, "--break-link needs FROM,TO");
            link = {parts[0], parts[1]};
        }
        std::string grouping = group_by;
        if (grouping.empty()) {
            if (!spec.roles.mediators.empty()) grouping = spec.roles.mediators.front();
            else if (!spec.conditioning.empty()) grouping = spec.conditioning.front().first;
            else
                sce::fail(Errc::validation_error,
                          "no mediator or conditioning covariate to group by; pass --group-by");
        }
        const auto side = shuffle_side == "effect" ? sce::stats::ShuffleSide::effect
                                                   : sce::stats::ShuffleSide::cause;

        const auto boot = sce::stats::bootstrap_ci(data, spec, dag, plan, opts, threads);
        const auto perm =
            sce::stats::permutation_test(data, spec, dag, link, grouping, plan, side, opts, threads);

        json report;
        report["tool"] = "sce";
        report["version"] = kToolVersion;
        report["measure"] = spec_echo(spec);
        report.update(measure_value_json(boot.point));
        report["identifiability"] = identifiability_json(boot.point_detail.gate);
        if (boot.point_detail.predictive_only) report["note"] = "predictive, not causal";
        report["ci"] = {sce::io::number_or_inf(boot.ci->first), sce::io::number_or_inf(boot.ci->second)};
        report["null_threshold"] = sce::io::number_or_inf(*perm.null_threshold);
        json summary = json::array();
        for (double v : *perm.null_summary) summary.push_back(sce::io::number_or_inf(v));
        report["null_summary"] = summary;
        report["significant"] = *perm.significant;
        report["replicates"] = plan.replicates;
        report["failed_replicates"] = boot.failed_replicates + perm.failed_replicates;
        report["high_failure_warning"] = boot.high_failure_warning || perm.high_failure_warning;
        report["seed"] = plan.seed;
        report["alpha"] = sce::io::round12(alpha);
        report["broken_link"] = {link.first, link.second};
        report["group_by"] = grouping;
        report["shuffled_side"] = shuffle_side;
        emit(report, output_path);
        return 0;
    }

    if (*simulate) {
        const auto model = sce::io::parse_model_file(model_path, defs);
        const auto data = sce::model::sample(model, rows, seed);
        if (output_path.empty()) {
            sce::io::write_dataset_csv(std::cout, data);
        } else {
            std::ofstream out(output_path, std::ios::binary);
            if (!out) sce::fail(Errc::validation_error, "cannot write '" + output_path + "'");
            sce::io::write_dataset_csv(out, data);
        }
        return 0;
    }

    if (*dsep) {
        const auto dag = sce::io::parse_dag_file(model_path);
        const bool separated = sce::graph::d_separated(dag, split_commas(set_a), split_commas(set_b),
                                                       split_commas(set_given));
        json report;
        report["tool"] = "sce";
        report["version"] = kToolVersion;
        report["a"] = split_commas(set_a);
        report["b"] = split_commas(set_b);
        report["given"] = split_commas(set_given);
        report["d_separated"] = separated;
        emit(report, output_path);
        return 0;
    }

    if (*identify) {
        const auto dag = sce::io::parse_dag_file(model_path);
        sce::graph::NodeRoleSpec roles;
        roles.cause = flags.cause;
        roles.effect = flags.effect;
        roles.mediators = flags.mediators;
        roles.observed_covariates = split_commas(flags.covariates);
        const auto report = sce::graph::check_identifiability(dag, roles);
        json j;
        j["tool"] = "sce";
        j["version"] = kToolVersion;
        j["identifiability"] = identifiability_json(report);
        emit(j, output_path);
        return 0;
    }

    if (*pipeline) {
        auto series = sce::io::read_series_csv(data_path);
        series = sce::est::detrend_harmonics(series, period, harmonics);
        sce::est::QuantizeOptions qopts;
        qopts.block_days = block_days;
        if (!thresholds.empty()) {
            const auto parts = split_commas(thresholds);
            if (parts.size() != 2) sce::fail(Errc::validation_error, "--thresholds needs LOW,HIGH");
            qopts.thresholds = {std::stod(parts[0]), std::stod(parts[1])};
        }
        const auto column = sce::est::quantize_blocks(series, qopts);
        std::ostringstream csv;
        csv << column_name << "\n";
        for (int c : column.categories) csv << c << "\n";
        if (output_path.empty()) {
            std::cout << csv.str();
        } else {
            std::ofstream out(output_path, std::ios::binary);
            if (!out) sce::fail(Errc::validation_error, "cannot write '" + output_path + "'");
            out << csv.str();
        }
        std::cerr << "thresholds: low=" << column.low << " high=" << column.high << "\n";
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return sce::errc_is_statistical(e.code()) ? 3 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
