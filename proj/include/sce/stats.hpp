#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "sce/estimate.hpp"

namespace sce::stats {

struct ResamplePlan {
    int replicates = 10000;
    uint64_t seed = 0;
    std::pair<double, double> ci_levels{0.05, 0.95};
    double null_cutoff = 0.95;

    void validate() const;
};

struct TestReport {
    measures::MeasureValue point;
    est::EstimateResult point_detail;
    std::optional<std::pair<double, double>> ci;  // bits; filled by bootstrap_ci
    std::optional<double> null_threshold;         // bits; filled by permutation_test
    std::optional<std::array<double, 5>> null_summary;  // min, q1, median, q3, max
    std::optional<bool> significant;
    ResamplePlan plan;
    long long failed_replicates = 0;
    bool high_failure_warning = false;  // more than 1% of replicates failed
};

// Percentile bootstrap for the estimated measure. Replicate b draws row
// indices from the substream (seed, "boot", b); replicates whose estimate is
// undefined are excluded and counted. Results do not depend on the thread
// count.
TestReport bootstrap_ci(const Dataset& d, const measures::MeasureSpec& spec,
                        const graph::CausalDag& dag, const ResamplePlan& plan,
                        const est::EstimateOptions& opts = {}, int threads = 1);

enum class ShuffleSide { cause, effect };

// Null-hypothesis test that destroys the broken link while preserving the
// rest of the dependence structure: rows are grouped by the group_by column
// and the link's cause-side column (or effect side, by flag) is permuted
// within each group with a Fisher-Yates walk on the substream
// (seed, "perm", b, group). The measure's null distribution is the estimates
// over permuted datasets; the significance threshold is its null_cutoff
// order statistic.
TestReport permutation_test(const Dataset& d, const measures::MeasureSpec& spec,
                            const graph::CausalDag& dag,
                            const std::pair<std::string, std::string>& broken_link,
                            const std::string& group_by, const ResamplePlan& plan,
                            ShuffleSide side = ShuffleSide::cause,
                            const est::EstimateOptions& opts = {}, int threads = 1);

}  // namespace sce::stats
