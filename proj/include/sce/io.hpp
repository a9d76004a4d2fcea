#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sce/dataset.hpp"
#include "sce/model.hpp"

namespace sce::io {

using Defines = std::vector<std::pair<std::string, double>>;

// Arithmetic for probability cells written as strings: numbers, $name
// substitutions, + - * /, unary minus and parentheses. "1-$eps" with
// eps=0.1 gives 0.9.
double eval_expression(const std::string& text, const Defines& defines);

// Model file layout: {"nodes": [{"name", "states", "parents", "cpt"}...]}.
// "cpt" rows are ordered by the mixed-radix parent index (first listed parent
// most significant); each row lists probabilities over the child states in
// declared order, as numbers or expression strings.
model::CausalModel parse_model_json(const nlohmann::json& j, const Defines& defines = {});
model::CausalModel parse_model_file(const std::string& path, const Defines& defines = {});

// Same layout with "cpt" optional; only the structure is read.
graph::CausalDag parse_dag_json(const nlohmann::json& j);
graph::CausalDag parse_dag_file(const std::string& path);

nlohmann::json model_to_json(const model::CausalModel& m);

// RFC-4180 CSV with a header row of node names; cells are state labels
// validated against the graph's declarations.
Dataset read_dataset_csv(const std::string& path, const graph::CausalDag& dag);
void write_dataset_csv(std::ostream& out, const Dataset& d);

// Two-column CSV (day,value) for raw series input.
TimeSeries read_series_csv(const std::string& path);

// Report numbers are rounded to 12 significant digits before serialization,
// which keeps their JSON round-trip lossless.
double round12(double v);

// Finite values as (rounded) numbers, infinity as the string "inf".
nlohmann::json number_or_inf(double v);

}  // namespace sce::io
