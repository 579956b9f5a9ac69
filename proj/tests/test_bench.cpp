#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "support/empirical_stub.hpp"
#include "varskip/bench.hpp"
#include "varskip/error.hpp"
#include "varskip/estimator.hpp"
#include "varskip/model.hpp"
#include "varskip/rng.hpp"
#include "varskip/workload.hpp"

using namespace varskip;
using testing::EmpiricalStub;

namespace {

std::string tmp_path(const std::string& name) {
    std::filesystem::create_directories("test_tmp");
    return "test_tmp/" + name;
}

Table make_table(const std::vector<std::string>& names,
                 const std::vector<std::vector<std::string>>& rows) {
    const size_t n = names.size();
    std::vector<std::vector<std::string>> per_col(n);
    for (const auto& r : rows)
        for (size_t c = 0; c < n; ++c) per_col[c].push_back(r[c]);
    std::vector<Column> cols;
    for (size_t c = 0; c < n; ++c) cols.push_back({names[c], Vocab::build(per_col[c])});
    std::vector<int32_t> cells;
    for (const auto& r : rows)
        for (size_t c = 0; c < n; ++c) cells.push_back(cols[c].vocab.encode(r[c]));
    return Table("t", std::move(cols), std::move(cells));
}

Table grid_table(int32_t da, int32_t db, int32_t reps) {
    std::vector<std::vector<std::string>> rows;
    for (int32_t r = 0; r < reps; ++r)
        for (int32_t a = 0; a < da; ++a)
            for (int32_t b = 0; b < db; ++b)
                rows.push_back({std::to_string(a), std::to_string(b)});
    return make_table({"a", "b"}, rows);
}

}  // namespace

TEST_CASE("q_error formula and clamp") {
    const double M = 1000.0;
    CHECK(q_error(2.0 / M, 8.0 / M, 1.0 / M) == 4.0);
    CHECK(q_error(8.0 / M, 2.0 / M, 1.0 / M) == 4.0);  // symmetric
    CHECK(q_error(0.0, 5.0 / M, 1.0 / M) == 5.0);      // clamp lifts the zero
    CHECK(q_error(0.25, 0.25, 1.0 / M) == 1.0);
    CHECK(q_error(0.0, 0.0, 1.0 / M) == 1.0);
    CHECK(q_error(0.1, 0.9, 1.0 / M) >= 1.0);
    CHECK_THROWS_AS(q_error(-0.1, 0.5, 1.0 / M), Error);
    CHECK_THROWS_AS(q_error(0.1, -0.5, 1.0 / M), Error);
    CHECK_THROWS_AS(q_error(0.1, 0.5, 0.0), Error);
}

TEST_CASE("nearest-rank quantiles") {
    std::vector<double> v;
    for (int i = 1; i <= 100; ++i) v.push_back(i);
    CHECK(nearest_rank_quantile(v, 0.5) == 50.0);
    CHECK(nearest_rank_quantile(v, 0.99) == 99.0);
    CHECK(nearest_rank_quantile(v, 1.0) == 100.0);
    CHECK(nearest_rank_quantile(v, 0.0) == 1.0);
    std::vector<double> one = {7.0};
    CHECK(nearest_rank_quantile(one, 0.5) == 7.0);
    CHECK(nearest_rank_quantile(one, 0.99) == 7.0);
    CHECK_THROWS_AS(nearest_rank_quantile({}, 0.5), Error);
    CHECK_THROWS_AS(nearest_rank_quantile(v, 1.5), Error);
}

TEST_CASE("summarize on a constant list has zero bootstrap std") {
    std::vector<double> v(40, 2.5);
    Rng rng(1);
    QuantileBlock q = summarize(v, rng);
    CHECK(q.median == 2.5);
    CHECK(q.p99 == 2.5);
    CHECK(q.max == 2.5);
    CHECK(q.median_std == 0.0);
    CHECK(q.p99_std == 0.0);
    CHECK(q.max_std == 0.0);
    CHECK_THROWS_AS(summarize({}, rng), Error);
    CHECK_THROWS_AS(summarize(v, rng, 0), Error);
}

TEST_CASE("bootstrap std of the median matches the analytic reference") {
    // 15 ones and 10 threes: the resampled median is 3 exactly when the
    // resample draws ≥ 13 threes, so the bootstrap-median distribution is a
    // scaled Bernoulli with p = P(Binomial(25, 0.4) ≥ 13).
    std::vector<double> v(15, 1.0);
    v.insert(v.end(), 10, 3.0);
    double p3 = 0.0;
    for (int k = 13; k <= 25; ++k) {
        double logc = std::lgamma(26.0) - std::lgamma(k + 1.0) - std::lgamma(26.0 - k);
        p3 += std::exp(logc + k * std::log(0.4) + (25 - k) * std::log(0.6));
    }
    const double analytic_std = 2.0 * std::sqrt(p3 * (1.0 - p3));

    // High-resolution empirical reference with independent resampling code.
    Rng orng(777);
    const int64_t R = 1000000;
    double sum = 0.0, sumsq = 0.0;
    for (int64_t r = 0; r < R; ++r) {
        int threes = 0;
        for (int i = 0; i < 25; ++i) threes += orng.uniform_u64(25) >= 15 ? 1 : 0;
        const double med = threes >= 13 ? 3.0 : 1.0;
        sum += med;
        sumsq += med * med;
    }
    const double ref_std =
        std::sqrt((sumsq - sum * sum / static_cast<double>(R)) / static_cast<double>(R - 1));
    CHECK(ref_std == doctest::Approx(analytic_std).epsilon(0.01));

    // Average several independent summarize runs to tame 1000-resample noise.
    double acc = 0.0;
    for (uint64_t s = 0; s < 20; ++s) {
        Rng rng(100 + s);
        acc += summarize(v, rng, 1000).median_std;
    }
    CHECK(acc / 20.0 == doctest::Approx(analytic_std).epsilon(0.10));
}

TEST_CASE("workload generation constrains pivot values") {
    SUBCASE("counts and determinism") {
        Table t = grid_table(4, 8, 4);  // 128 rows
        WorkloadSpec spec;
        spec.count = 50;
        Rng r1(5), r2(5);
        std::vector<RangeQuery> w1 = gen_workload(t, spec, r1);
        std::vector<RangeQuery> w2 = gen_workload(t, spec, r2);
        REQUIRE(w1.size() == 50);
        for (size_t i = 0; i < w1.size(); ++i) {
            CHECK(format_query(w1[i], t.columns()) == format_query(w2[i], t.columns()));
            CHECK(exact_count(t, w1[i]) > 0);  // pivot construction guarantee
            // k range [5,12] clamps to [2,2] on a two-column table.
            CHECK(w1[i].n_constrained() == 2);
        }
    }
    SUBCASE("spec validation") {
        Table t = grid_table(3, 3, 2);
        WorkloadSpec bad;
        bad.count = 0;
        Rng rng(1);
        CHECK_THROWS_AS(gen_workload(t, bad, rng), Error);
        bad.count = 1;
        bad.k_min = 3;
        bad.k_max = 2;
        CHECK_THROWS_AS(gen_workload(t, bad, rng), Error);
    }
}

TEST_CASE("exact_count matches a hand count") {
    Table t = make_table({"c0", "c1"}, {{"0", "0"},
                                        {"1", "0"},
                                        {"1", "1"},
                                        {"1", "2"},
                                        {"1", "3"},
                                        {"2", "1"},
                                        {"0", "2"},
                                        {"1", "2"}});
    RangeQuery q = parse_query("c0 == 1 AND c1 <= 2", t.columns());
    CHECK(exact_count(t, q) == 4);  // rows 2,3,4(no: c1=3),8 → (1,0),(1,1),(1,2),(1,2)
    CHECK(exact_count(t, parse_query("", t.columns())) == 8);
}

TEST_CASE("workload files round trip and validate") {
    Table t = grid_table(4, 4, 3);
    WorkloadSpec spec;
    spec.count = 12;
    Rng rng(9);
    std::vector<RangeQuery> w = gen_workload(t, spec, rng);
    const std::string path = tmp_path("wl.txt");
    save_workload(path, t, w);
    std::vector<RangeQuery> back = load_workload(path, t);
    REQUIRE(back.size() == w.size());
    for (size_t i = 0; i < w.size(); ++i)
        CHECK(format_query(back[i], t.columns()) == format_query(w[i], t.columns()));

    // Saving the loaded workload reproduces the bytes.
    const std::string path2 = tmp_path("wl2.txt");
    save_workload(path2, t, back);
    std::ifstream a(path), b(path2);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());

    // Tampered counts and mismatched tables are rejected.
    std::string text = sa.str();
    text.replace(text.find('\t') - 1, 1, "9");
    const std::string bad = tmp_path("wl_bad.txt");
    std::ofstream(bad, std::ios::binary) << text;
    CHECK_THROWS_AS(load_workload(bad, t), Error);
    Table other = grid_table(4, 4, 2);
    CHECK_THROWS_AS(load_workload(path, other), Error);
    CHECK_THROWS_AS(load_workload(tmp_path("nope.txt"), t), Error);
}

TEST_CASE("run_bench produces the full cross product with sane rows") {
    Table t = make_table({"a", "b", "c"}, {{"0", "0", "1"},
                                           {"0", "1", "0"},
                                           {"1", "0", "0"},
                                           {"1", "1", "1"},
                                           {"2", "0", "1"},
                                           {"2", "1", "0"},
                                           {"0", "0", "0"},
                                           {"1", "0", "1"}});
    std::vector<Ordering> orders = {identity_ordering(3), {2, 1, 0}};
    EmpiricalStub stub(t, orders, 0.25);
    WorkloadSpec wspec;
    wspec.count = 8;
    Rng wrng(3);
    std::vector<RangeQuery> workload = gen_workload(t, wspec, wrng);

    BenchSpec spec;
    spec.budgets = {16, 64};
    spec.seed = 4;
    spec.resamples = 200;
    BenchReport rep = run_bench(stub, t, workload, spec);
    CHECK(rep.rows.size() == 2 * 5 * 2);  // budgets × estimators × orders
    CHECK(rep.n_queries == 8);
    CHECK(rep.table_rows == t.n_rows());

    for (const BenchRow& row : rep.rows) {
        CHECK(row.quant.median >= 1.0);
        CHECK(row.quant.median <= row.quant.p99);
        CHECK(row.quant.p99 <= row.quant.max);
        REQUIRE(row.queries.size() == 8);
        for (const QueryResult& q : row.queries) CHECK(q.q >= 1.0);
        if (row.estimator == "naive")
            CHECK(row.mean_passes == static_cast<double>(row.budget * 3));
        if (row.estimator == "skipping") {
            double expect = 0.0;
            for (const RangeQuery& q : workload)
                expect += static_cast<double>(
                    row.budget * forward_pass_cost(q, orders[static_cast<size_t>(row.order)],
                                                   true));
            CHECK(row.mean_passes == doctest::Approx(expect / 8.0));
        }
    }
}

TEST_CASE("run_bench exact-model q-errors approach one") {
    Table t = grid_table(4, 4, 8);  // uniform 128-row grid
    EmpiricalStub stub(t, {});
    Rng wrng(2);
    WorkloadSpec wspec;
    wspec.count = 4;
    std::vector<RangeQuery> workload = gen_workload(t, wspec, wrng);
    BenchSpec spec;
    spec.budgets = {10000};
    spec.estimators = {"skipping"};
    spec.resamples = 100;
    BenchReport rep = run_bench(stub, t, workload, spec);
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].quant.max < 1.05);
}

TEST_CASE("run_bench rejects estimator and model mismatches") {
    Table t = grid_table(3, 3, 4);
    Rng wrng(1);
    WorkloadSpec wspec;
    wspec.count = 3;
    std::vector<RangeQuery> workload = gen_workload(t, wspec, wrng);

    ModelConfig cfg;
    cfg.blocks = 1;
    cfg.hidden = 8;
    cfg.d_emb = 2;
    ArModel plain = ArModel::init(t.columns(), cfg);  // no masking, one order
    BenchSpec spec;
    spec.budgets = {8};
    spec.estimators = {"skipping"};
    CHECK_THROWS_WITH_AS(run_bench(plain, t, workload, spec),
                         doctest::Contains("masked"), Error);
    spec.estimators = {"multiorder"};
    CHECK_THROWS_WITH_AS(run_bench(plain, t, workload, spec),
                         doctest::Contains("multi-order"), Error);
    spec.estimators = {"sideways"};
    CHECK_THROWS_AS(run_bench(plain, t, workload, spec), Error);
    spec.estimators = {"baseline"};
    CHECK_THROWS_AS(run_bench(plain, t, {}, spec), Error);
    spec.budgets = {0};
    CHECK_THROWS_AS(run_bench(plain, t, workload, spec), Error);

    EmpiricalStub stub(t, {});
    Table other = grid_table(3, 4, 4);
    BenchSpec ok;
    ok.budgets = {8};
    ok.estimators = {"baseline"};
    CHECK_THROWS_WITH_AS(run_bench(stub, other, gen_workload(other, wspec, wrng), ok),
                         doctest::Contains("match"), Error);
}

TEST_CASE("bench reports serialize deterministically") {
    Table t = grid_table(4, 4, 4);
    std::vector<Ordering> orders = {identity_ordering(2), {1, 0}};
    EmpiricalStub stub(t, orders, 0.1);
    Rng wrng(8);
    WorkloadSpec wspec;
    wspec.count = 6;
    std::vector<RangeQuery> workload = gen_workload(t, wspec, wrng);
    BenchSpec spec;
    spec.budgets = {16};
    spec.estimators = {"baseline", "skipping", "multiorder", "multiorder+skipping", "naive"};
    spec.seed = 77;
    spec.resamples = 50;

    BenchReport r1 = run_bench(stub, t, workload, spec);
    BenchReport r2 = run_bench(stub, t, workload, spec);
    CHECK(bench_json_data(r1) == bench_json_data(r2));

    // Worker count is an execution detail, never a result.
    BenchSpec serial = spec;
    serial.workers = 1;
    BenchSpec wide = spec;
    wide.workers = 4;
    CHECK(bench_json_data(run_bench(stub, t, workload, serial)) == bench_json_data(r1));
    CHECK(bench_json_data(run_bench(stub, t, workload, wide)) == bench_json_data(r1));

    // The embedded data block of the full document matches the bare dump.
    nlohmann::json doc = nlohmann::json::parse(bench_json(r1));
    CHECK(doc["data"] == nlohmann::json::parse(bench_json_data(r1)));
    CHECK(doc["meta"].contains("wall_ms_total"));

    std::string csv = bench_csv(r1);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 5 * 2);
    CHECK(csv.rfind("estimator,budget,order,median,", 0) == 0);

    std::string text = bench_text(r1);
    CHECK(text.find("baseline") != std::string::npos);
    CHECK(text.find("multiorder+skipping") != std::string::npos);
    CHECK(text.find("±") != std::string::npos);
}
