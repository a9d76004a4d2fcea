#include "sce/estimate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace sce::est {

using measures::MeasureKind;
using measures::MeasureSpec;
using measures::MeasureValue;
using prob::Pmf;

prob::Pmf mle_conditional(const Dataset& d, const std::string& target,
                          const std::vector<std::pair<std::string, std::string>>& given) {
    const int tcol = d.column_index(target);
    std::vector<std::pair<int, int>> req;
    for (const auto& [name, label] : given) {
        const int col = d.column_index(name);
        const auto& states = d.column(col).states;
        auto it = std::find(states.begin(), states.end(), label);
        if (it == states.end())
            fail(Errc::unknown_state, "'" + label + "' is not a state of column '" + name + "'");
        req.push_back({col, static_cast<int>(it - states.begin())});
    }

    const std::size_t card = d.column(tcol).states.size();
    std::vector<long long> counts(card, 0);
    long long matched = 0;
    for (std::size_t row = 0; row < d.row_count(); ++row) {
        bool ok = true;
        for (const auto& [col, state] : req)
            if (d.cells(col)[row] != state) {
                ok = false;
                break;
            }
        if (!ok) continue;
        ++matched;
        ++counts[static_cast<std::size_t>(d.cells(tcol)[row])];
    }
    if (matched == 0)
        fail(Errc::undefined_conditional, "no rows match the conditioning assignment");

    std::vector<double> probs(card);
    for (std::size_t i = 0; i < card; ++i)
        probs[i] = static_cast<double>(counts[i]) / static_cast<double>(matched);
    return Pmf(d.column(tcol).states, probs);
}

namespace {

void require_states_match(const Dataset& d, const graph::CausalDag& dag, const std::string& name) {
    const int col = d.column_index(name);
    const int node = dag.index_of(name);
    if (d.column(col).states != dag.node(node).states)
        fail(Errc::validation_error,
             "dataset column '" + name + "' does not declare the same states as the graph node");
}

std::string cell_description(const MeasureSpec& spec, const std::string& cause_label,
                             const std::vector<std::string>& med_labels) {
    std::string out = "p(" + spec.roles.effect + "|" + spec.roles.cause + "=" + cause_label;
    for (std::size_t i = 0; i < med_labels.size(); ++i)
        out += "," + spec.roles.mediators[i] + "=" + med_labels[i];
    for (const auto& [k, v] : spec.conditioning) out += "," + k + "=" + v;
    return out + ")";
}

}  // namespace

PluginEstimator::PluginEstimator(const Dataset& d, const MeasureSpec& spec,
                                 const graph::CausalDag& dag, const EstimateOptions& opts)
    : data_(&d), spec_(spec) {
    if (spec.kind != MeasureKind::ste && spec.kind != MeasureKind::snde &&
        spec.kind != MeasureKind::snie)
        fail(Errc::role_mismatch,
             std::string("plug-in estimation covers ste/snde/snie, not ") +
                 measures::measure_kind_name(spec.kind));
    spec.roles.validate(dag);

    gate_ = graph::check_identifiability(dag, spec.roles);
    if (!gate_.identifiable) {
        if (!opts.acknowledge_confounding)
            fail(Errc::not_identifiable,
                 "no covariate subsets license observational estimation; pass the "
                 "acknowledge-confounding option to compute a predictive value instead");
        predictive_only_ = true;
    }

    // involved columns: cause, mediators..., effect
    std::vector<std::string> involved{spec.roles.cause};
    involved.insert(involved.end(), spec.roles.mediators.begin(), spec.roles.mediators.end());
    involved.push_back(spec.roles.effect);
    for (const auto& name : involved) {
        require_states_match(d, dag, name);
        layout_.involved_columns.push_back(d.column_index(name));
    }
    std::set<std::string> seen;
    for (const auto& [name, label] : spec.conditioning) {
        if (!seen.insert(name).second) fail(Errc::role_mismatch, "covariate conditioned twice");
        require_states_match(d, dag, name);
        const int col = d.column_index(name);
        const auto& states = d.column(col).states;
        auto it = std::find(states.begin(), states.end(), label);
        if (it == states.end())
            fail(Errc::unknown_state, "'" + label + "' is not a state of '" + name + "'");
        layout_.required.push_back({col, static_cast<int>(it - states.begin())});
    }

    layout_.strides.resize(layout_.involved_columns.size());
    std::size_t acc = 1;
    for (std::size_t i = layout_.involved_columns.size(); i-- > 0;) {
        layout_.strides[i] = acc;
        acc *= d.column(layout_.involved_columns[i]).states.size();
    }
    layout_.table_size = acc;

    cause_card_ = d.column(layout_.involved_columns.front()).states.size();
    effect_card_ = d.column(layout_.involved_columns.back()).states.size();
    med_cells_ = layout_.table_size / (cause_card_ * effect_card_);
    effect_states_ = d.column(layout_.involved_columns.back()).states;
    cause_state_ = dag.state_index(dag.index_of(spec.roles.cause), spec.cause_value);

    row_keys_.resize(d.row_count());
    for (std::size_t row = 0; row < d.row_count(); ++row) {
        bool ok = true;
        for (const auto& [col, state] : layout_.required)
            if (d.cells(col)[row] != state) {
                ok = false;
                break;
            }
        if (!ok) {
            row_keys_[row] = static_cast<uint32_t>(layout_.table_size);
            continue;
        }
        std::size_t key = 0;
        for (std::size_t i = 0; i < layout_.involved_columns.size(); ++i)
            key += layout_.strides[i] *
                   static_cast<std::size_t>(d.cells(layout_.involved_columns[i])[row]);
        row_keys_[row] = static_cast<uint32_t>(key);
    }

    if (!spec.local_baseline) {
        all_row_cause_counts_.assign(cause_card_, 0);
        const auto& cause_cells = d.cells(layout_.involved_columns.front());
        for (std::size_t row = 0; row < d.row_count(); ++row)
            ++all_row_cause_counts_[static_cast<std::size_t>(cause_cells[row])];
        all_rows_ = static_cast<long long>(d.row_count());
    }
}

std::vector<long long> PluginEstimator::count_rows() const {
    std::vector<long long> counts(layout_.table_size, 0);
    for (uint32_t key : row_keys_)
        if (key < layout_.table_size) ++counts[key];
    return counts;
}

MeasureValue PluginEstimator::estimate_from_counts(const std::vector<long long>& counts,
                                                   std::vector<EstimatedConditional>* used) const {
    const std::size_t cx = cause_card_, cz = med_cells_, cy = effect_card_;
    auto at = [&](std::size_t x, std::size_t z, std::size_t y) {
        return counts[(x * cz + z) * cy + y];
    };

    std::vector<long long> cnt_x(cx, 0);
    std::vector<long long> cnt_xz(cx * cz, 0);
    long long total = 0;
    for (std::size_t x = 0; x < cx; ++x)
        for (std::size_t z = 0; z < cz; ++z) {
            long long c = 0;
            for (std::size_t y = 0; y < cy; ++y) c += at(x, z, y);
            cnt_xz[x * cz + z] = c;
            cnt_x[x] += c;
            total += c;
        }
    if (total == 0)
        fail(Errc::undefined_conditional, "no rows match the conditioning assignment");

    const std::size_t x0 = static_cast<std::size_t>(cause_state_);

    // labels for mediator cells, resolved lazily for error/report text
    auto med_labels = [&](std::size_t z) {
        std::vector<std::string> labels;
        std::size_t rem = z;
        for (std::size_t i = 1; i + 1 < layout_.involved_columns.size(); ++i) {
            const auto& states = data_->column(layout_.involved_columns[i]).states;
            std::size_t stride = 1;
            for (std::size_t j = i + 1; j + 1 < layout_.involved_columns.size(); ++j)
                stride *= data_->column(layout_.involved_columns[j]).states.size();
            labels.push_back(states[rem / stride]);
            rem %= stride;
        }
        return labels;
    };

    auto conditional_row = [&](std::size_t x, std::optional<std::size_t> z) -> std::vector<double> {
        long long denom = 0;
        std::vector<double> row(cy, 0.0);
        if (z) {
            denom = cnt_xz[x * cz + *z];
            if (denom == 0)
                fail(Errc::undefined_conditional,
                     "no rows for " + cell_description(spec_, data_->column(layout_.involved_columns[0]).states[x],
                                                       med_labels(*z)));
            for (std::size_t y = 0; y < cy; ++y)
                row[y] = static_cast<double>(at(x, *z, y)) / static_cast<double>(denom);
        } else {
            denom = cnt_x[x];
            if (denom == 0)
                fail(Errc::undefined_conditional,
                     "no rows for " + cell_description(spec_, data_->column(layout_.involved_columns[0]).states[x], {}));
            for (std::size_t y = 0; y < cy; ++y) {
                long long c = 0;
                for (std::size_t zz = 0; zz < cz; ++zz) c += at(x, zz, y);
                row[y] = static_cast<double>(c) / static_cast<double>(denom);
            }
        }
        if (used)
            used->push_back({cell_description(spec_, data_->column(layout_.involved_columns[0]).states[x],
                                              z ? med_labels(*z) : std::vector<std::string>{}),
                             denom});
        return row;
    };

    // baseline weights over cause values
    std::vector<double> wx(cx, 0.0);
    if (spec_.local_baseline) {
        for (std::size_t x = 0; x < cx; ++x)
            wx[x] = static_cast<double>(cnt_x[x]) / static_cast<double>(total);
    } else {
        for (std::size_t x = 0; x < cx; ++x)
            wx[x] = static_cast<double>(all_row_cause_counts_[x]) / static_cast<double>(all_rows_);
    }

    const std::vector<double> first = conditional_row(x0, std::nullopt);
    std::vector<double> mixture(cy, 0.0);

    if (spec_.kind == MeasureKind::ste) {
        for (std::size_t x = 0; x < cx; ++x) {
            if (wx[x] == 0.0) continue;
            const auto row = conditional_row(x, std::nullopt);
            for (std::size_t y = 0; y < cy; ++y) mixture[y] += wx[x] * row[y];
        }
    } else if (spec_.kind == MeasureKind::snde) {
        // mediator weights follow the intervened cause value
        for (std::size_t x = 0; x < cx; ++x) {
            if (wx[x] == 0.0) continue;
            for (std::size_t z = 0; z < cz; ++z) {
                const double wz = static_cast<double>(cnt_xz[x0 * cz + z]) /
                                  static_cast<double>(cnt_x[x0]);
                const double w = wx[x] * wz;
                if (w == 0.0) continue;
                const auto row = conditional_row(x, z);
                for (std::size_t y = 0; y < cy; ++y) mixture[y] += w * row[y];
            }
        }
    } else {  // snie: mediator weights follow the naturally occurring cause
        for (std::size_t x = 0; x < cx; ++x) {
            if (wx[x] == 0.0) continue;
            if (cnt_x[x] == 0)
                fail(Errc::undefined_conditional,
                     "no rows for " +
                         cell_description(spec_, data_->column(layout_.involved_columns[0]).states[x], {}));
            for (std::size_t z = 0; z < cz; ++z) {
                const double wz = static_cast<double>(cnt_xz[x * cz + z]) /
                                  static_cast<double>(cnt_x[x]);
                const double w = wx[x] * wz;
                if (w == 0.0) continue;
                const auto row = conditional_row(x0, z);
                for (std::size_t y = 0; y < cy; ++y) mixture[y] += w * row[y];
            }
        }
    }

    const Pmf first_pmf(effect_states_, first);
    const Pmf mixture_pmf(effect_states_, mixture);
    MeasureValue out;
    out.bits = prob::kl_divergence(first_pmf, mixture_pmf);
    if (spec_.normalized)
        out.normalized = measures::normalize_measure(out.bits, prob::entropy(first_pmf));
    out.components.push_back({"intervened", first_pmf});
    out.components.push_back({"baseline", mixture_pmf});
    return out;
}

EstimateResult estimate_measure(const Dataset& d, const MeasureSpec& spec,
                                const graph::CausalDag& dag, const EstimateOptions& opts) {
    PluginEstimator estimator(d, spec, dag, opts);
    EstimateResult result;
    result.gate = estimator.gate();
    result.predictive_only = estimator.predictive_only();
    result.value = estimator.estimate_from_counts(estimator.count_rows(), &result.conditionals);
    return result;
}

TimeSeries detrend_harmonics(const TimeSeries& ts, double period_days, int harmonics) {
    ts.validate();
    if (period_days <= 0.0 || harmonics < 0)
        fail(Errc::validation_error, "bad detrend parameters");
    const std::size_t n = ts.values.size();
    const std::size_t terms = 2 * static_cast<std::size_t>(harmonics) + 1;
    if (n <= terms) fail(Errc::series_too_short, "need more samples than fit terms");

    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(terms));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    const double w = 2.0 * M_PI / period_days;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = ts.timestamps[i];
        design(static_cast<Eigen::Index>(i), 0) = 1.0;
        for (int j = 1; j <= harmonics; ++j) {
            design(static_cast<Eigen::Index>(i), 2 * j - 1) = std::cos(w * j * t);
            design(static_cast<Eigen::Index>(i), 2 * j) = std::sin(w * j * t);
        }
        y(static_cast<Eigen::Index>(i)) = ts.values[i];
    }
    const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(y);
    const Eigen::VectorXd residual = y - design * beta;

    TimeSeries out;
    out.timestamps = ts.timestamps;
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.values[i] = residual(static_cast<Eigen::Index>(i));
    return out;
}

QuantizedColumn quantize_blocks(const TimeSeries& ts, const QuantizeOptions& opts) {
    ts.validate();
    if (opts.block_days < 1) fail(Errc::validation_error, "block size must be at least one day");
    const std::size_t n = ts.values.size();
    if (n < static_cast<std::size_t>(opts.block_days))
        fail(Errc::series_too_short, "series shorter than one block");

    QuantizedColumn out;
    if (opts.thresholds) {
        out.low = opts.thresholds->first;
        out.high = opts.thresholds->second;
        if (out.low > out.high) fail(Errc::validation_error, "thresholds out of order");
    } else {
        // cutpoints at the tertile order statistics of the raw series
        std::vector<double> sorted = ts.values;
        std::sort(sorted.begin(), sorted.end());
        const auto rank = [&](double q) {
            std::size_t r = static_cast<std::size_t>(
                std::ceil(q * static_cast<double>(n)));
            if (r == 0) r = 1;
            return sorted[r - 1];
        };
        out.low = rank(1.0 / 3.0);
        out.high = rank(2.0 / 3.0);
    }

    const std::size_t block = static_cast<std::size_t>(opts.block_days);
    const std::size_t blocks = n / block;
    out.categories.reserve(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
        double mean = 0.0;
        for (std::size_t i = 0; i < block; ++i) mean += ts.values[b * block + i];
        mean /= static_cast<double>(block);
        if (mean <= out.low)
            out.categories.push_back(-1);
        else if (mean >= out.high)
            out.categories.push_back(1);
        else
            out.categories.push_back(0);
    }
    return out;
}

}  // namespace sce::est
