#include "varskip/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "varskip/error.hpp"
#include "varskip/estimator.hpp"
#include "varskip/workload.hpp"

namespace varskip {

namespace {

constexpr const char* kEstimators[] = {"baseline", "skipping", "multiorder",
                                       "multiorder+skipping", "naive"};

bool known_estimator(const std::string& name) {
    for (const char* e : kEstimators)
        if (name == e) return true;
    return false;
}

bool wants_skipping(const std::string& name) {
    return name == "skipping" || name == "multiorder+skipping";
}

bool wants_ensemble(const std::string& name) {
    return name == "multiorder" || name == "multiorder+skipping";
}

}  // namespace

// Run `count` independent tasks on a capped pool; task results must not
// depend on scheduling. The first exception wins and is rethrown.
void parallel_for(int64_t count, int32_t workers, const std::function<void(int64_t)>& task) {
    if (workers < 0) fail_invalid("worker count must be ≥ 0");
    int64_t pool = workers > 0 ? workers : static_cast<int64_t>(std::thread::hardware_concurrency());
    pool = std::clamp<int64_t>(pool, 1, count);
    if (pool <= 1) {
        for (int64_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<int64_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex err_mu;
    std::exception_ptr err;
    auto worker = [&] {
        for (;;) {
            const int64_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                task(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!err) err = std::current_exception();
                failed.store(true);
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(static_cast<size_t>(pool));
    for (int64_t t = 0; t < pool; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
    if (err) std::rethrow_exception(err);
}

double q_error(double estimate, double actual, double floor) {
    if (estimate < 0.0 || actual < 0.0) fail_invalid("q_error operands must be non-negative");
    if (!(floor > 0.0)) fail_invalid("q_error floor must be positive");
    const double e = std::max(estimate, floor);
    const double a = std::max(actual, floor);
    return std::max(e, a) / std::min(e, a);
}

double nearest_rank_quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) fail_invalid("quantile of an empty list");
    if (p < 0.0 || p > 1.0) fail_invalid("quantile level must be in [0, 1]");
    const auto n = static_cast<int64_t>(sorted.size());
    const auto rank = static_cast<int64_t>(std::ceil(p * static_cast<double>(n)));
    return sorted[static_cast<size_t>(std::clamp<int64_t>(rank, 1, n) - 1)];
}

QuantileBlock summarize(std::span<const double> errors, Rng& rng, int32_t resamples) {
    if (errors.empty()) fail_invalid("summarize needs at least one error value");
    if (resamples < 1) fail_invalid("bootstrap needs at least one resample");
    std::vector<double> sorted(errors.begin(), errors.end());
    std::sort(sorted.begin(), sorted.end());

    QuantileBlock out;
    out.median = nearest_rank_quantile(sorted, 0.5);
    out.p99 = nearest_rank_quantile(sorted, 0.99);
    out.max = sorted.back();

    const auto n = static_cast<int64_t>(sorted.size());
    const int64_t rank50 = std::max<int64_t>(
        1, static_cast<int64_t>(std::ceil(0.5 * static_cast<double>(n))));
    const int64_t rank99 = std::max<int64_t>(
        1, static_cast<int64_t>(std::ceil(0.99 * static_cast<double>(n))));

    // Resample counts over the sorted values, then read quantiles off the
    // cumulative counts — no per-resample sort needed.
    std::vector<int32_t> counts(sorted.size());
    double sum[3] = {0, 0, 0}, sumsq[3] = {0, 0, 0};
    for (int32_t r = 0; r < resamples; ++r) {
        std::fill(counts.begin(), counts.end(), 0);
        for (int64_t i = 0; i < n; ++i)
            counts[static_cast<size_t>(rng.uniform_u64(static_cast<uint64_t>(n)))] += 1;
        double q[3];
        int64_t cum = 0;
        size_t j = 0;
        int hit = 0;
        const int64_t targets[3] = {rank50, rank99, n};
        for (; j < counts.size() && hit < 3; ++j) {
            cum += counts[j];
            while (hit < 3 && cum >= targets[hit]) q[hit++] = sorted[j];
        }
        for (int t = 0; t < 3; ++t) {
            sum[t] += q[t];
            sumsq[t] += q[t] * q[t];
        }
    }
    auto std_of = [&](int t) {
        if (resamples < 2) return 0.0;
        const double r = static_cast<double>(resamples);
        const double var = (sumsq[t] - sum[t] * sum[t] / r) / (r - 1.0);
        return var > 0.0 ? std::sqrt(var) : 0.0;
    };
    out.median_std = std_of(0);
    out.p99_std = std_of(1);
    out.max_std = std_of(2);
    return out;
}

void BenchSpec::validate() const {
    if (budgets.empty()) fail_invalid("bench needs at least one budget");
    for (int64_t b : budgets)
        if (b < 1) fail_invalid("budgets must be positive");
    if (estimators.empty()) fail_invalid("bench needs at least one estimator");
    for (const std::string& e : estimators)
        if (!known_estimator(e))
            fail_invalid("unknown estimator '" + e +
                         "' (want baseline|skipping|multiorder|multiorder+skipping|naive)");
    if (resamples < 1) fail_invalid("bootstrap resamples must be ≥ 1");
    if (workers < 0) fail_invalid("worker count must be ≥ 0");
}

BenchReport run_bench(const ConditionalModel& model, const Table& table,
                      const std::vector<RangeQuery>& workload, const BenchSpec& spec) {
    spec.validate();
    if (workload.empty()) fail_invalid("bench needs a nonempty workload");
    if (model.n_cols() != table.n_cols()) fail_invalid("model does not match the table");
    for (int32_t c = 0; c < table.n_cols(); ++c)
        if (model.schema()[static_cast<size_t>(c)].vocab.size() !=
            table.column(c).vocab.size())
            fail_invalid("model does not match the table (column '" + table.column(c).name +
                         "')");
    const auto n_orders = static_cast<int32_t>(model.orderings().size());
    for (const std::string& e : spec.estimators) {
        if (wants_skipping(e) && !model.mask_trained())
            fail_invalid("estimator '" + e + "' needs a model trained with masked inputs");
        if (wants_ensemble(e) && n_orders < 2)
            fail_invalid("estimator '" + e + "' needs a multi-order model");
    }

    BenchReport report;
    report.table_name = table.name();
    report.table_rows = table.n_rows();
    report.table_cols = table.n_cols();
    report.n_queries = static_cast<int64_t>(workload.size());
    report.seed = spec.seed;

    const double floor = 1.0 / static_cast<double>(table.n_rows());
    std::vector<double> actuals;
    actuals.reserve(workload.size());
    for (const RangeQuery& q : workload)
        actuals.push_back(static_cast<double>(exact_count(table, q)) /
                          static_cast<double>(table.n_rows()));

    // One task per report row; rows are pure functions of their own RNG
    // chain, so the pool size never changes the results.
    struct RowTask {
        size_t ei;
        int64_t budget;
        int32_t order;
    };
    std::vector<RowTask> tasks;
    for (size_t ei = 0; ei < spec.estimators.size(); ++ei)
        for (int64_t budget : spec.budgets)
            for (int32_t order = 0; order < n_orders; ++order)
                tasks.push_back({ei, budget, order});
    report.rows.resize(tasks.size());

    parallel_for(static_cast<int64_t>(tasks.size()), spec.workers, [&](int64_t ti) {
        const RowTask& task = tasks[static_cast<size_t>(ti)];
        const std::string& est = spec.estimators[task.ei];
        const int64_t budget = task.budget;
        const int32_t order = task.order;
        const uint64_t s1 = Rng::derive_seed(spec.seed, static_cast<uint64_t>(task.ei));
        const uint64_t s2 = Rng::derive_seed(s1, static_cast<uint64_t>(budget));
        const uint64_t s3 = Rng::derive_seed(s2, static_cast<uint64_t>(order));
        Rng rng(s3);

        BenchRow row;
        row.estimator = est;
        row.budget = budget;
        row.order = order;
        row.queries.reserve(workload.size());

        const auto t0 = std::chrono::steady_clock::now();
        for (size_t qi = 0; qi < workload.size(); ++qi) {
            const RangeQuery& q = workload[qi];
            Estimate e;
            if (est == "baseline")
                e = progressive_sample(model, q, budget, rng, false, order);
            else if (est == "skipping")
                e = progressive_sample(model, q, budget, rng, true, order);
            else if (est == "multiorder")
                e = ensemble_estimate(model, q, budget, rng, false);
            else if (est == "multiorder+skipping")
                e = ensemble_estimate(model, q, budget, rng, true);
            else
                e = naive_sample(model, q, budget, rng, order);
            QueryResult res;
            res.actual = actuals[qi];
            res.estimate = e.selectivity;
            res.q = q_error(e.selectivity, res.actual, floor);
            res.forward_passes = e.forward_passes;
            row.queries.push_back(res);
        }
        const auto t1 = std::chrono::steady_clock::now();
        row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

        std::vector<double> qs;
        qs.reserve(row.queries.size());
        double passes = 0.0;
        for (const QueryResult& r : row.queries) {
            qs.push_back(r.q);
            passes += static_cast<double>(r.forward_passes);
        }
        Rng boot(Rng::derive_seed(s3, 0xb007));
        row.quant = summarize(qs, boot, spec.resamples);
        row.mean_passes = passes / static_cast<double>(row.queries.size());
        report.rows[static_cast<size_t>(ti)] = std::move(row);
    });
    return report;
}

namespace {

nlohmann::ordered_json data_block(const BenchReport& report) {
    nlohmann::ordered_json data;
    data["table"] = report.table_name;
    data["table_rows"] = report.table_rows;
    data["table_cols"] = report.table_cols;
    data["n_queries"] = report.n_queries;
    data["seed"] = report.seed;
    data["rows"] = nlohmann::ordered_json::array();
    for (const BenchRow& row : report.rows) {
        nlohmann::ordered_json r;
        r["estimator"] = row.estimator;
        r["budget"] = row.budget;
        r["order"] = row.order;
        r["median"] = row.quant.median;
        r["p99"] = row.quant.p99;
        r["max"] = row.quant.max;
        r["median_std"] = row.quant.median_std;
        r["p99_std"] = row.quant.p99_std;
        r["max_std"] = row.quant.max_std;
        r["mean_passes"] = row.mean_passes;
        r["queries"] = nlohmann::ordered_json::array();
        for (const QueryResult& q : row.queries) {
            nlohmann::ordered_json qq;
            qq["actual"] = q.actual;
            qq["estimate"] = q.estimate;
            qq["q"] = q.q;
            qq["passes"] = q.forward_passes;
            r["queries"].push_back(std::move(qq));
        }
        data["rows"].push_back(std::move(r));
    }
    return data;
}

}  // namespace

std::string bench_json_data(const BenchReport& report) { return data_block(report).dump(); }

std::string bench_json(const BenchReport& report) {
    nlohmann::ordered_json root;
    root["data"] = data_block(report);
    nlohmann::ordered_json meta;
    double total = 0.0;
    meta["rows"] = nlohmann::ordered_json::array();
    for (const BenchRow& row : report.rows) {
        nlohmann::ordered_json r;
        r["estimator"] = row.estimator;
        r["budget"] = row.budget;
        r["order"] = row.order;
        r["wall_ms"] = row.wall_ms;
        meta["rows"].push_back(std::move(r));
        total += row.wall_ms;
    }
    meta["wall_ms_total"] = total;
    root["meta"] = std::move(meta);
    return root.dump(2) + "\n";
}

std::string bench_csv(const BenchReport& report) {
    std::string out =
        "estimator,budget,order,median,p99,max,median_std,p99_std,max_std,mean_passes\n";
    char buf[320];
    for (const BenchRow& row : report.rows) {
        std::snprintf(buf, sizeof buf,
                      "%s,%lld,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      row.estimator.c_str(), static_cast<long long>(row.budget), row.order,
                      row.quant.median, row.quant.p99, row.quant.max, row.quant.median_std,
                      row.quant.p99_std, row.quant.max_std, row.mean_passes);
        out += buf;
    }
    return out;
}

std::string bench_text(const BenchReport& report) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "table %s (%lld rows, %d cols), %lld queries, seed %llu\n\n",
                  report.table_name.c_str(), static_cast<long long>(report.table_rows),
                  report.table_cols, static_cast<long long>(report.n_queries),
                  static_cast<unsigned long long>(report.seed));
    std::string out = buf;
    std::snprintf(buf, sizeof buf, "%-20s %7s %18s %18s %18s %10s\n", "estimator", "budget",
                  "median", "p99", "max", "passes");
    out += buf;

    // Cells in first-appearance order; quantiles as mean ± std over orders.
    std::vector<std::pair<std::string, int64_t>> cells;
    for (const BenchRow& row : report.rows) {
        std::pair<std::string, int64_t> key{row.estimator, row.budget};
        if (std::find(cells.begin(), cells.end(), key) == cells.end()) cells.push_back(key);
    }
    for (const auto& [est, budget] : cells) {
        double sum[3] = {0, 0, 0}, sumsq[3] = {0, 0, 0}, passes = 0.0;
        int32_t k = 0;
        for (const BenchRow& row : report.rows) {
            if (row.estimator != est || row.budget != budget) continue;
            const double v[3] = {row.quant.median, row.quant.p99, row.quant.max};
            for (int t = 0; t < 3; ++t) {
                sum[t] += v[t];
                sumsq[t] += v[t] * v[t];
            }
            passes += row.mean_passes;
            ++k;
        }
        auto cell = [&](int t) {
            const double mean = sum[t] / k;
            double std = 0.0;
            if (k > 1) {
                const double var = (sumsq[t] - sum[t] * sum[t] / k) / (k - 1.0);
                std = var > 0.0 ? std::sqrt(var) : 0.0;
            }
            char c[64];
            std::snprintf(c, sizeof c, "%.4g ± %.3g", mean, std);
            return std::string(c);
        };
        std::snprintf(buf, sizeof buf, "%-20s %7lld %18s %18s %18s %10.1f\n", est.c_str(),
                      static_cast<long long>(budget), cell(0).c_str(), cell(1).c_str(),
                      cell(2).c_str(), passes / k);
        out += buf;
    }
    return out;
}

}  // namespace varskip
