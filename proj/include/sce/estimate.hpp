#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sce/dataset.hpp"
#include "sce/measures.hpp"

namespace sce::est {

// Maximum-likelihood conditional pmf: count ratios over rows matching the
// given assignment. Throws UndefinedConditional when nothing matches.
prob::Pmf mle_conditional(const Dataset& d, const std::string& target,
                          const std::vector<std::pair<std::string, std::string>>& given = {});

struct EstimateOptions {
    // Lets estimation proceed when the identifiability gate fails; the result
    // is then flagged as predictive rather than causal.
    bool acknowledge_confounding = false;
};

struct EstimatedConditional {
    std::string description;
    long long rows;
};

struct EstimateResult {
    measures::MeasureValue value;
    bool predictive_only = false;
    graph::IdentifiabilityReport gate;
    std::vector<EstimatedConditional> conditionals;
};

// How rows are folded into the dense count table the estimators read.
// Resamplers use this to rebuild counts cheaply without materializing
// datasets.
struct CountingLayout {
    std::vector<int> involved_columns;       // dataset column indices: cause, mediators..., effect
    std::vector<std::size_t> strides;        // same order; key = sum stride * state
    std::vector<std::pair<int, int>> required;  // (dataset column, state) the conditioning pins
    std::size_t table_size = 0;
};

// Plug-in estimator for ste / snde / snie (conditional via the spec's
// conditioning assignment). Construction runs the identifiability gate;
// estimation is a pure function of the count table, which makes resampling
// cheap.
class PluginEstimator {
public:
    PluginEstimator(const Dataset& d, const measures::MeasureSpec& spec,
                    const graph::CausalDag& dag, const EstimateOptions& opts = {});

    const graph::IdentifiabilityReport& gate() const { return gate_; }
    bool predictive_only() const { return predictive_only_; }
    const CountingLayout& layout() const { return layout_; }

    // Key of each dataset row; rows excluded by the conditioning map to
    // layout().table_size and must not be counted.
    const std::vector<uint32_t>& row_keys() const { return row_keys_; }

    std::vector<long long> count_rows() const;

    measures::MeasureValue estimate_from_counts(const std::vector<long long>& counts,
                                                std::vector<EstimatedConditional>* used = nullptr) const;

private:
    const Dataset* data_;
    measures::MeasureSpec spec_;
    graph::IdentifiabilityReport gate_;
    bool predictive_only_ = false;
    CountingLayout layout_;
    std::vector<uint32_t> row_keys_;
    std::size_t cause_card_ = 0, effect_card_ = 0, med_cells_ = 0;
    int cause_state_ = 0;
    std::vector<std::string> effect_states_;
    std::vector<long long> all_row_cause_counts_;  // for the non-local baseline
    long long all_rows_ = 0;
};

// One-shot estimation per the plug-in formulas.
EstimateResult estimate_measure(const Dataset& d, const measures::MeasureSpec& spec,
                                const graph::CausalDag& dag, const EstimateOptions& opts = {});

// Least-squares removal of the mean and the leading k harmonics of the given
// period; returns the residual (anomaly) series.
TimeSeries detrend_harmonics(const TimeSeries& ts, double period_days = 365.25, int harmonics = 6);

struct QuantizeOptions {
    int block_days = 14;
    // Explicit (low, high) cutpoints; when absent they are placed at the
    // empirical tertiles of the raw (pre-averaging) series.
    std::optional<std::pair<double, double>> thresholds;
};

struct QuantizedColumn {
    std::vector<int> categories;  // one of -1, 0, +1 per complete block
    double low = 0.0;
    double high = 0.0;
};

// Non-overlapping block means mapped to {-1, 0, +1}: mean <= low gives -1,
// mean >= high gives +1, else 0 (ties resolve downward). A partial trailing
// block is dropped.
QuantizedColumn quantize_blocks(const TimeSeries& ts, const QuantizeOptions& opts = {});

}  // namespace sce::est
