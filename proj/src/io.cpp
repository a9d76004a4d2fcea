#include "sce/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace sce::io {

namespace {

class ExpressionParser {
public:
    ExpressionParser(const std::string& text, const Defines& defines)
        : text_(text), defines_(defines) {}

    double parse() {
        const double v = expression();
        skip_space();
        if (pos_ != text_.size())
            fail(Errc::parse_error, "trailing characters in expression '" + text_ + "'");
        return v;
    }

private:
    double expression() {
        double v = term();
        for (;;) {
            skip_space();
            if (peek() == '+') {
                ++pos_;
                v += term();
            } else if (peek() == '-') {
                ++pos_;
                v -= term();
            } else {
                return v;
            }
        }
    }

    double term() {
        double v = factor();
        for (;;) {
            skip_space();
            if (peek() == '*') {
                ++pos_;
                v *= factor();
            } else if (peek() == '/') {
                ++pos_;
                v /= factor();
            } else {
                return v;
            }
        }
    }

    double factor() {
        skip_space();
        const char c = peek();
        if (c == '(') {
            ++pos_;
            const double v = expression();
            skip_space();
            if (peek() != ')') fail(Errc::parse_error, "missing ')' in '" + text_ + "'");
            ++pos_;
            return v;
        }
        if (c == '-') {
            ++pos_;
            return -factor();
        }
        if (c == '$') {
            ++pos_;
            std::string name;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                name += text_[pos_++];
            for (const auto& [k, v] : defines_)
                if (k == name) return v;
            fail(Errc::parse_error, "undefined parameter '$" + name + "' (pass --define " + name + "=...)");
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* end = nullptr;
            const double v = std::strtod(text_.c_str() + pos_, &end);
            if (end == text_.c_str() + pos_) fail(Errc::parse_error, "bad number in '" + text_ + "'");
            pos_ = static_cast<std::size_t>(end - text_.c_str());
            return v;
        }
        fail(Errc::parse_error, "unexpected character in expression '" + text_ + "'");
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    const std::string& text_;
    const Defines& defines_;
    std::size_t pos_ = 0;
};

double cell_value(const nlohmann::json& cell, const Defines& defines) {
    if (cell.is_number()) return cell.get<double>();
    if (cell.is_string()) return eval_expression(cell.get<std::string>(), defines);
    fail(Errc::parse_error, "probability cells must be numbers or expression strings");
}

struct ParsedNodes {
    std::vector<graph::NodeDef> defs;
    std::vector<std::pair<std::string, std::string>> edges;
    std::vector<std::vector<std::string>> parents;
    const nlohmann::json* raw;
};

ParsedNodes parse_structure(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("nodes") || !j["nodes"].is_array())
        fail(Errc::parse_error, "model file must be an object with a 'nodes' array");
    ParsedNodes out;
    out.raw = &j["nodes"];
    for (const auto& node : j["nodes"]) {
        if (!node.contains("name") || !node["name"].is_string())
            fail(Errc::parse_error, "every node needs a string 'name'");
        const std::string name = node["name"].get<std::string>();
        if (!node.contains("states") || !node["states"].is_array() || node["states"].empty())
            fail(Errc::parse_error, "node '" + name + "' needs a nonempty 'states' array");
        graph::NodeDef def;
        def.name = name;
        for (const auto& s : node["states"]) {
            if (s.is_string())
                def.states.push_back(s.get<std::string>());
            else
                def.states.push_back(s.dump());
        }
        std::vector<std::string> parents;
        if (node.contains("parents")) {
            for (const auto& p : node["parents"]) {
                parents.push_back(p.get<std::string>());
                out.edges.push_back({parents.back(), name});
            }
        }
        out.parents.push_back(std::move(parents));
        out.defs.push_back(std::move(def));
    }
    return out;
}

}  // namespace

double eval_expression(const std::string& text, const Defines& defines) {
    return ExpressionParser(text, defines).parse();
}

graph::CausalDag parse_dag_json(const nlohmann::json& j) {
    ParsedNodes parsed = parse_structure(j);
    return graph::CausalDag(std::move(parsed.defs), std::move(parsed.edges));
}

model::CausalModel parse_model_json(const nlohmann::json& j, const Defines& defines) {
    ParsedNodes parsed = parse_structure(j);
    graph::CausalDag dag(parsed.defs, parsed.edges);

    std::vector<model::Cpt> cpts;
    for (std::size_t i = 0; i < parsed.defs.size(); ++i) {
        const auto& node = (*parsed.raw)[i];
        const std::string& name = parsed.defs[i].name;
        if (!node.contains("cpt") || !node["cpt"].is_array())
            fail(Errc::parse_error, "node '" + name + "' needs a 'cpt' array of rows");
        const std::size_t card = parsed.defs[i].states.size();
        std::vector<double> values;
        std::size_t row_index = 0;
        for (const auto& row : node["cpt"]) {
            if (!row.is_array() || row.size() != card)
                fail(Errc::validation_error, "node '" + name + "' cpt row " +
                                                 std::to_string(row_index) + " must list " +
                                                 std::to_string(card) + " probabilities");
            for (const auto& cell : row) values.push_back(cell_value(cell, defines));
            ++row_index;
        }
        cpts.emplace_back(name, parsed.parents[i], card, std::move(values));
    }
    return model::CausalModel(std::move(dag), std::move(cpts));
}

namespace {

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::parse_error, "cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::parse_error, "invalid JSON in '" + path + "': " + e.what());
    }
    return j;
}

}  // namespace

model::CausalModel parse_model_file(const std::string& path, const Defines& defines) {
    return parse_model_json(load_json(path), defines);
}

graph::CausalDag parse_dag_file(const std::string& path) { return parse_dag_json(load_json(path)); }

nlohmann::json model_to_json(const model::CausalModel& m) {
    nlohmann::json nodes = nlohmann::json::array();
    const auto& dag = m.dag();
    for (std::size_t i = 0; i < dag.node_count(); ++i) {
        const int node = static_cast<int>(i);
        nlohmann::json entry;
        entry["name"] = dag.node(node).name;
        entry["states"] = dag.node(node).states;
        entry["parents"] = m.cpt(node).parents();
        nlohmann::json rows = nlohmann::json::array();
        const auto& cpt = m.cpt(node);
        for (std::size_t r = 0; r < cpt.row_count(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t s = 0; s < cpt.child_cardinality(); ++s)
                row.push_back(cpt.at(r, static_cast<int>(s)));
            rows.push_back(std::move(row));
        }
        entry["cpt"] = std::move(rows);
        nodes.push_back(std::move(entry));
    }
    return nlohmann::json{{"nodes", std::move(nodes)}};
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::parse_error, "cannot open '" + path + "'");
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    for (std::size_t i = 0; i < content.size(); ++i) {
        const char c = content[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"' && field.empty() && !field_started) {
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            field_started = false;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < content.size() && content[i + 1] == '\n') ++i;
            row.push_back(std::move(field));
            field.clear();
            field_started = false;
            rows.push_back(std::move(row));
            row.clear();
        } else {
            field += c;
            field_started = true;
        }
    }
    if (field_started || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    if (quoted) fail(Errc::parse_error, "unterminated quoted field in '" + path + "'");
    if (rows.empty()) fail(Errc::parse_error, "'" + path + "' is empty");
    return rows;
}

}  // namespace

Dataset read_dataset_csv(const std::string& path, const graph::CausalDag& dag) {
    const auto rows = read_csv(path);
    const auto& header = rows[0];
    if (header.empty()) fail(Errc::parse_error, "missing CSV header");

    std::vector<DatasetColumn> columns;
    std::vector<int> node_of;
    for (const auto& name : header) {
        const int node = dag.index_of(name);
        node_of.push_back(node);
        columns.push_back({name, dag.node(node).states});
    }

    std::vector<std::vector<int>> cells(columns.size());
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != header.size())
            fail(Errc::parse_error, "row " + std::to_string(r) + " has " +
                                        std::to_string(rows[r].size()) + " cells, expected " +
                                        std::to_string(header.size()));
        for (std::size_t c = 0; c < header.size(); ++c)
            cells[c].push_back(dag.state_index(node_of[c], rows[r][c]));
    }
    if (cells[0].empty()) fail(Errc::parse_error, "dataset has a header but no rows");
    return Dataset(std::move(columns), std::move(cells));
}

void write_dataset_csv(std::ostream& out, const Dataset& d) {
    auto emit = [&](const std::string& cell) {
        if (cell.find_first_of(",\"\n\r") == std::string::npos) {
            out << cell;
            return;
        }
        out << '"';
        for (char c : cell) {
            if (c == '"') out << '"';
            out << c;
        }
        out << '"';
    };
    for (std::size_t c = 0; c < d.column_count(); ++c) {
        if (c) out << ',';
        emit(d.column(static_cast<int>(c)).name);
    }
    out << '\n';
    for (std::size_t row = 0; row < d.row_count(); ++row) {
        for (std::size_t c = 0; c < d.column_count(); ++c) {
            if (c) out << ',';
            emit(d.label(static_cast<int>(c), row));
        }
        out << '\n';
    }
}

TimeSeries read_series_csv(const std::string& path) {
    const auto rows = read_csv(path);
    if (rows[0].size() != 2 || rows[0][0] != "day" || rows[0][1] != "value")
        fail(Errc::parse_error, "raw series CSV needs a 'day,value' header");
    TimeSeries ts;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 2) fail(Errc::parse_error, "bad series row " + std::to_string(r));
        try {
            ts.timestamps.push_back(std::stod(rows[r][0]));
            ts.values.push_back(std::stod(rows[r][1]));
        } catch (const std::exception&) {
            fail(Errc::parse_error, "non-numeric series row " + std::to_string(r));
        }
    }
    ts.validate();
    return ts;
}

double round12(double v) {
    if (!std::isfinite(v)) return v;
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.12g", v);
    return std::strtod(buffer, nullptr);
}

nlohmann::json number_or_inf(double v) {
    if (std::isinf(v)) return "inf";
    return round12(v);
}

}  // namespace sce::io
