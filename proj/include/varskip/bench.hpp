#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "varskip/conditional.hpp"
#include "varskip/query.hpp"
#include "varskip/rng.hpp"
#include "varskip/table.hpp"

namespace varskip {

// Run `count` independent tasks on a pool of `workers` threads (0 = hardware
// concurrency). Tasks must be scheduling-independent; the first exception is
// rethrown after the pool drains.
void parallel_for(int64_t count, int32_t workers, const std::function<void(int64_t)>& task);

// max/min ratio after clamping both operands below at `floor` (one row's
// worth of selectivity), so zero estimates stay finite. Always ≥ 1.
double q_error(double estimate, double actual, double floor);

// Nearest-rank quantile on an ascending-sorted list: the ceil(p·N)-th
// smallest value (p == 0 gives the minimum).
double nearest_rank_quantile(std::span<const double> sorted, double p);

struct QuantileBlock {
    double median = 1.0, p99 = 1.0, max = 1.0;
    double median_std = 0.0, p99_std = 0.0, max_std = 0.0;  // bootstrap stds
};

// Median/P99/max plus a bootstrap standard deviation for each, from
// `resamples` resamples with replacement.
QuantileBlock summarize(std::span<const double> errors, Rng& rng, int32_t resamples = 1000);

struct QueryResult {
    double actual = 0.0;    // true selectivity from the scan oracle
    double estimate = 0.0;
    double q = 1.0;
    int64_t forward_passes = 0;
};

struct BenchRow {
    std::string estimator;
    int64_t budget = 0;
    int32_t order = 0;  // ordering index; repetition index for ensembles
    std::vector<QueryResult> queries;
    QuantileBlock quant;
    double mean_passes = 0.0;
    double wall_ms = 0.0;  // reported in meta only, never in the data block
};

struct BenchSpec {
    std::vector<int64_t> budgets = {100, 1000, 10000};
    std::vector<std::string> estimators = {"baseline", "skipping", "multiorder",
                                           "multiorder+skipping", "naive"};
    uint64_t seed = 0;
    int32_t resamples = 1000;
    int32_t workers = 0;  // parallel report rows; 0 = hardware concurrency

    void validate() const;
};

struct BenchReport {
    std::string table_name;
    int64_t table_rows = 0;
    int32_t table_cols = 0;
    int64_t n_queries = 0;
    uint64_t seed = 0;
    std::vector<BenchRow> rows;  // |budgets| × |estimators| × |orders|
};

// The experiment cross product. All estimators share one model: baseline /
// skipping / naive get one row per ordering, the ensemble estimators one
// independent repetition per ordering slot. Estimators whose requirements
// the model cannot meet (skipping without mask training, multiorder on a
// single-order model) are rejected up front.
BenchReport run_bench(const ConditionalModel& model, const Table& table,
                      const std::vector<RangeQuery>& workload, const BenchSpec& spec);

// {"data": …, "meta": …}; the data block is a pure function of table,
// workload, model and seed — byte-identical across runs. Meta carries wall
// times and is excluded from that guarantee.
std::string bench_json(const BenchReport& report);
std::string bench_json_data(const BenchReport& report);  // just the data block
std::string bench_csv(const BenchReport& report);
// Quantiles as mean ± std across the order repetitions of each
// (estimator, budget) cell.
std::string bench_text(const BenchReport& report);

}  // namespace varskip
