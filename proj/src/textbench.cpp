#include <algorithm>
#include <chrono>
#include <cstdio>

#include "json.hpp"
#include "varskip/error.hpp"
#include "varskip/textmatch.hpp"

namespace varskip {

void TextBenchSpec::validate() const {
    if (budget < 1) fail_invalid("text bench budget must be positive");
    if (resamples < 1) fail_invalid("bootstrap resamples must be ≥ 1");
    if (workers < 0) fail_invalid("worker count must be ≥ 0");
}

TextBenchReport run_text_bench(const ConditionalModel& model, const Table& table,
                               const std::vector<std::string>& patterns,
                               const TextBenchSpec& spec) {
    spec.validate();
    if (patterns.empty()) fail_invalid("text bench needs at least one pattern");
    if (!model.prefix_trained())
        fail_invalid("text bench needs a prefix-mask trained model");
    if (model.n_cols() != table.n_cols()) fail_invalid("model does not match the table");
    for (int32_t c = 0; c < table.n_cols(); ++c)
        if (model.schema()[static_cast<size_t>(c)].vocab.values() !=
            table.column(c).vocab.values())
            fail_invalid("model does not match the table (column '" + table.column(c).name +
                         "')");

    // Parse everything up front so bad patterns fail before any sampling.
    std::vector<Pattern> parsed;
    parsed.reserve(patterns.size());
    for (const std::string& p : patterns)
        parsed.push_back(parse_pattern(p, model.schema()[0].vocab));

    TextBenchReport report;
    report.table_name = table.name();
    report.table_rows = table.n_rows();
    report.width = table.n_cols();
    report.budget = spec.budget;
    report.seed = spec.seed;
    report.rows.resize(patterns.size());

    const double floor = 1.0 / static_cast<double>(table.n_rows());
    parallel_for(static_cast<int64_t>(patterns.size()), spec.workers, [&](int64_t i) {
        const Pattern& pat = parsed[static_cast<size_t>(i)];
        PatternRow row;
        row.pattern = patterns[static_cast<size_t>(i)];
        row.actual = static_cast<double>(exact_contains_count(table, pat)) /
                     static_cast<double>(table.n_rows());
        const uint64_t sp = Rng::derive_seed(spec.seed, static_cast<uint64_t>(i));
        const auto t0 = std::chrono::steady_clock::now();
        Rng skip_rng(Rng::derive_seed(sp, 0));
        row.skipping = contains_prob(model, pat, spec.budget, skip_rng);
        Rng naive_rng(Rng::derive_seed(sp, 1));
        row.naive = naive_contains(model, pat, spec.budget, naive_rng);
        const auto t1 = std::chrono::steady_clock::now();
        row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        row.q_skipping = q_error(row.skipping.probability, row.actual, floor);
        row.q_naive = q_error(row.naive.probability, row.actual, floor);
        report.rows[static_cast<size_t>(i)] = std::move(row);
    });

    std::vector<double> skip_q, naive_q;
    skip_q.reserve(report.rows.size());
    naive_q.reserve(report.rows.size());
    for (const PatternRow& row : report.rows) {
        skip_q.push_back(row.q_skipping);
        naive_q.push_back(row.q_naive);
    }
    Rng boot_skip(Rng::derive_seed(spec.seed, 0xb007));
    report.skip_quant = summarize(skip_q, boot_skip, spec.resamples);
    Rng boot_naive(Rng::derive_seed(spec.seed, 0xb008));
    report.naive_quant = summarize(naive_q, boot_naive, spec.resamples);
    return report;
}

namespace {

nlohmann::ordered_json quant_json(const QuantileBlock& q) {
    nlohmann::ordered_json out;
    out["median"] = q.median;
    out["p99"] = q.p99;
    out["max"] = q.max;
    out["median_std"] = q.median_std;
    out["p99_std"] = q.p99_std;
    out["max_std"] = q.max_std;
    return out;
}

nlohmann::ordered_json data_block(const TextBenchReport& report) {
    nlohmann::ordered_json data;
    data["table"] = report.table_name;
    data["table_rows"] = report.table_rows;
    data["width"] = report.width;
    data["n_patterns"] = static_cast<int64_t>(report.rows.size());
    data["budget"] = report.budget;
    data["seed"] = report.seed;
    data["skipping"] = quant_json(report.skip_quant);
    data["naive"] = quant_json(report.naive_quant);
    data["rows"] = nlohmann::ordered_json::array();
    for (const PatternRow& row : report.rows) {
        nlohmann::ordered_json r;
        r["pattern"] = row.pattern;
        r["actual"] = row.actual;
        r["probability"] = row.skipping.probability;
        r["per_position_first_terms"] = row.skipping.first_terms;
        r["budget"] = report.budget;
        r["second_term_budget"] = row.skipping.second_term_budget;
        r["forward_passes"] = row.skipping.forward_passes;
        r["std_error"] = row.skipping.std_error;
        r["q"] = row.q_skipping;
        r["naive_probability"] = row.naive.probability;
        r["naive_passes"] = row.naive.forward_passes;
        r["naive_std_error"] = row.naive.std_error;
        r["naive_q"] = row.q_naive;
        data["rows"].push_back(std::move(r));
    }
    return data;
}

}  // namespace

std::string text_bench_json_data(const TextBenchReport& report) {
    return data_block(report).dump();
}

std::string text_bench_json(const TextBenchReport& report) {
    nlohmann::ordered_json root;
    root["data"] = data_block(report);
    nlohmann::ordered_json meta;
    meta["rows"] = nlohmann::ordered_json::array();
    double total = 0.0;
    for (const PatternRow& row : report.rows) {
        nlohmann::ordered_json r;
        r["pattern"] = row.pattern;
        r["wall_ms"] = row.wall_ms;
        meta["rows"].push_back(std::move(r));
        total += row.wall_ms;
    }
    meta["wall_ms_total"] = total;
    root["meta"] = std::move(meta);
    return root.dump(2) + "\n";
}

std::string text_bench_text(const TextBenchReport& report) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "table %s (%lld strings, width %d), %lld patterns, budget %lld, seed %llu\n\n",
                  report.table_name.c_str(), static_cast<long long>(report.table_rows),
                  report.width, static_cast<long long>(report.rows.size()),
                  static_cast<long long>(report.budget),
                  static_cast<unsigned long long>(report.seed));
    std::string out = buf;
    std::snprintf(buf, sizeof buf, "%-10s %18s %18s %18s\n", "estimator", "median", "p99", "max");
    out += buf;
    auto line = [&](const char* name, const QuantileBlock& q) {
        auto cell = [](double v, double s) {
            char c[64];
            std::snprintf(c, sizeof c, "%.4g ± %.3g", v, s);
            return std::string(c);
        };
        std::snprintf(buf, sizeof buf, "%-10s %18s %18s %18s\n", name,
                      cell(q.median, q.median_std).c_str(), cell(q.p99, q.p99_std).c_str(),
                      cell(q.max, q.max_std).c_str());
        out += buf;
    };
    line("skipping", report.skip_quant);
    line("naive", report.naive_quant);

    out += "\n";
    std::snprintf(buf, sizeof buf, "%-24s %12s %12s %9s %12s %9s\n", "pattern", "actual",
                  "skipping", "q", "naive", "q");
    out += buf;
    for (const PatternRow& row : report.rows) {
        const std::string quoted = "'" + row.pattern + "'";
        std::snprintf(buf, sizeof buf, "%-24s %12.4g %12.4g %9.3g %12.4g %9.3g\n",
                      quoted.c_str(), row.actual, row.skipping.probability, row.q_skipping,
                      row.naive.probability, row.q_naive);
        out += buf;
    }
    return out;
}

}  // namespace varskip
