#include "sce/stats.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

#include "sce/rng.hpp"

namespace sce::stats {

using est::EstimateOptions;
using est::PluginEstimator;
using measures::MeasureSpec;

void ResamplePlan::validate() const {
    if (replicates < 1) fail(Errc::validation_error, "at least one replicate required");
    if (!(ci_levels.first > 0.0 && ci_levels.first < 1.0 && ci_levels.second > 0.0 &&
          ci_levels.second < 1.0 && ci_levels.first <= ci_levels.second))
        fail(Errc::validation_error, "confidence levels must be ordered within (0,1)");
    if (!(null_cutoff > 0.0 && null_cutoff < 1.0))
        fail(Errc::validation_error, "null cutoff must lie in (0,1)");
}

namespace {

// 1-based nearest-rank order statistic over an ascending-sorted sample.
double order_statistic(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    std::size_t r = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    if (r < 1) r = 1;
    if (r > n) r = n;
    return sorted[r - 1];
}

struct ReplicateOutcome {
    std::vector<double> values;  // successful replicate estimates, ascending
    long long failed = 0;
};

// Run fn(b) for b in 1..B over `threads` workers; slots are written by
// replicate index so the aggregate never depends on scheduling.
template <typename Fn>
ReplicateOutcome run_replicates(int replicates, int threads, Fn&& fn) {
    std::vector<double> slots(static_cast<std::size_t>(replicates));
    std::vector<char> ok(static_cast<std::size_t>(replicates), 0);
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&](int lo, int hi) {
        for (int b = lo; b < hi; ++b) {
            try {
                slots[static_cast<std::size_t>(b)] = fn(b + 1);
                ok[static_cast<std::size_t>(b)] = 1;
            } catch (const Error& e) {
                if (e.code() != Errc::undefined_conditional) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };

    if (threads <= 1) {
        worker(0, replicates);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (replicates + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int lo = t * chunk;
            const int hi = std::min(replicates, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(worker, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);

    ReplicateOutcome out;
    for (int b = 0; b < replicates; ++b) {
        if (ok[static_cast<std::size_t>(b)])
            out.values.push_back(slots[static_cast<std::size_t>(b)]);
        else
            ++out.failed;
    }
    std::sort(out.values.begin(), out.values.end());
    return out;
}

TestReport begin_report(const PluginEstimator& estimator, const ResamplePlan& plan) {
    TestReport report;
    report.plan = plan;
    report.point_detail.gate = estimator.gate();
    report.point_detail.predictive_only = estimator.predictive_only();
    report.point_detail.value =
        estimator.estimate_from_counts(estimator.count_rows(), &report.point_detail.conditionals);
    report.point = report.point_detail.value;
    return report;
}

}  // namespace

TestReport bootstrap_ci(const Dataset& d, const MeasureSpec& spec, const graph::CausalDag& dag,
                        const ResamplePlan& plan, const EstimateOptions& opts, int threads) {
    plan.validate();
    PluginEstimator estimator(d, spec, dag, opts);
    TestReport report = begin_report(estimator, plan);

    const auto& keys = estimator.row_keys();
    const std::size_t n = keys.size();
    const std::size_t table = estimator.layout().table_size;

    ReplicateOutcome outcome = run_replicates(plan.replicates, threads, [&](int b) {
        rng::Substream stream(plan.seed);
        stream.fold("boot");
        stream.fold(static_cast<uint64_t>(b));
        std::vector<long long> counts(table, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const uint32_t key = keys[stream.next_below(n)];
            if (key < table) ++counts[key];
        }
        return estimator.estimate_from_counts(counts).bits.value();
    });

    if (outcome.values.empty())
        fail(Errc::all_replicates_failed, "every bootstrap replicate had an undefined estimate");
    report.failed_replicates = outcome.failed;
    report.high_failure_warning =
        static_cast<double>(outcome.failed) > 0.01 * static_cast<double>(plan.replicates);
    report.ci = {order_statistic(outcome.values, plan.ci_levels.first),
                 order_statistic(outcome.values, plan.ci_levels.second)};
    return report;
}

TestReport permutation_test(const Dataset& d, const MeasureSpec& spec, const graph::CausalDag& dag,
                            const std::pair<std::string, std::string>& broken_link,
                            const std::string& group_by, const ResamplePlan& plan,
                            ShuffleSide side, const EstimateOptions& opts, int threads) {
    plan.validate();
    {
        const int f = dag.index_of(broken_link.first);
        const int t = dag.index_of(broken_link.second);
        if (!dag.has_edge(f, t))
            fail(Errc::unknown_link,
                 broken_link.first + " -> " + broken_link.second + " is not a graph edge");
    }
    const std::string shuffled_name =
        side == ShuffleSide::cause ? broken_link.first : broken_link.second;
    if (shuffled_name == group_by)
        fail(Errc::validation_error, "the shuffled column cannot also be the grouping column");

    PluginEstimator estimator(d, spec, dag, opts);
    TestReport report = begin_report(estimator, plan);

    const auto& layout = estimator.layout();
    const std::size_t n = d.row_count();
    const int shuffled_col = d.column_index(shuffled_name);
    const int group_col = d.column_index(group_by);

    // row positions per group, in row order; group ids follow state order
    const std::size_t group_card = d.column(group_col).states.size();
    std::vector<std::vector<std::size_t>> group_rows(group_card);
    for (std::size_t row = 0; row < n; ++row)
        group_rows[static_cast<std::size_t>(d.cells(group_col)[row])].push_back(row);

    // key/match contribution of everything except the shuffled column
    std::size_t shuffled_stride = 0;
    for (std::size_t i = 0; i < layout.involved_columns.size(); ++i)
        if (layout.involved_columns[i] == shuffled_col) shuffled_stride = layout.strides[i];
    std::optional<int> shuffled_required_state;
    std::vector<std::size_t> base_key(n, 0);
    std::vector<char> base_match(n, 1);
    for (std::size_t row = 0; row < n; ++row) {
        std::size_t key = 0;
        for (std::size_t i = 0; i < layout.involved_columns.size(); ++i) {
            if (layout.involved_columns[i] == shuffled_col) continue;
            key += layout.strides[i] *
                   static_cast<std::size_t>(d.cells(layout.involved_columns[i])[row]);
        }
        base_key[row] = key;
        for (const auto& [col, state] : layout.required) {
            if (col == shuffled_col) {
                shuffled_required_state = state;
                continue;
            }
            if (d.cells(col)[row] != state) base_match[row] = 0;
        }
    }
    const std::vector<int>& original = d.cells(shuffled_col);

    ReplicateOutcome outcome = run_replicates(plan.replicates, threads, [&](int b) {
        std::vector<int> perm = original;
        for (std::size_t g = 0; g < group_card; ++g) {
            const auto& rows = group_rows[g];
            if (rows.size() < 2) continue;
            rng::Substream stream(plan.seed);
            stream.fold("perm");
            stream.fold(static_cast<uint64_t>(b));
            stream.fold(static_cast<uint64_t>(g));
            for (std::size_t i = rows.size() - 1; i > 0; --i) {
                const std::size_t j = stream.next_below(i + 1);
                std::swap(perm[rows[i]], perm[rows[j]]);
            }
        }
        std::vector<long long> counts(layout.table_size, 0);
        for (std::size_t row = 0; row < n; ++row) {
            if (!base_match[row]) continue;
            if (shuffled_required_state && perm[row] != *shuffled_required_state) continue;
            ++counts[base_key[row] + shuffled_stride * static_cast<std::size_t>(perm[row])];
        }
        return estimator.estimate_from_counts(counts).bits.value();
    });

    if (outcome.values.empty())
        fail(Errc::all_replicates_failed, "every permutation replicate had an undefined estimate");
    report.failed_replicates = outcome.failed;
    report.high_failure_warning =
        static_cast<double>(outcome.failed) > 0.01 * static_cast<double>(plan.replicates);
    report.null_threshold = order_statistic(outcome.values, plan.null_cutoff);
    report.null_summary = {outcome.values.front(), order_statistic(outcome.values, 0.25),
                           order_statistic(outcome.values, 0.5),
                           order_statistic(outcome.values, 0.75), outcome.values.back()};
    report.significant = report.point.bits.value() > *report.null_threshold;
    return report;
}

}  // namespace sce::stats
