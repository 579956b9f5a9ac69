#include "varskip/workload.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "varskip/error.hpp"

namespace varskip {

void WorkloadSpec::validate() const {
    if (count < 1) fail_invalid("workload count must be ≥ 1");
    if (k_min < 1 || k_min > k_max) fail_invalid("constraint range must satisfy 1 ≤ min ≤ max");
}

std::vector<RangeQuery> gen_workload(const Table& table, const WorkloadSpec& spec, Rng& rng) {
    spec.validate();
    const int32_t n = table.n_cols();
    const int32_t k_hi = std::min(spec.k_max, n);
    const int32_t k_lo = std::min(spec.k_min, k_hi);

    std::vector<RangeQuery> out;
    out.reserve(static_cast<size_t>(spec.count));
    std::vector<int32_t> cols(static_cast<size_t>(n));
    while (out.size() < static_cast<size_t>(spec.count)) {
        RangeQuery q;
        int32_t tries = 0;
        for (;; ++tries) {
            if (tries >= 1000)
                fail_runtime("workload generation exceeded 1000 tries for one query");
            const int32_t k = k_lo + rng.uniform_int(k_hi - k_lo + 1);
            std::iota(cols.begin(), cols.end(), 0);
            for (int32_t i = 0; i < k; ++i)  // partial Fisher-Yates: k distinct columns
                std::swap(cols[static_cast<size_t>(i)],
                          cols[static_cast<size_t>(i) + rng.uniform_u64(
                                                            static_cast<uint64_t>(n - i))]);
            const auto pivot = static_cast<int64_t>(
                rng.uniform_u64(static_cast<uint64_t>(table.n_rows())));

            q.regions.assign(static_cast<size_t>(n), Region::all());
            for (int32_t i = 0; i < k; ++i) {
                const int32_t c = cols[static_cast<size_t>(i)];
                const int32_t v = table.cell(pivot, c);
                const int32_t size = table.column(c).vocab.size();
                const int32_t op = rng.uniform_int(3);
                if (op == 0)
                    q.regions[static_cast<size_t>(c)] = Region::interval(v, v, size);
                else if (op == 1)
                    q.regions[static_cast<size_t>(c)] = Region::interval(0, v, size);
                else
                    q.regions[static_cast<size_t>(c)] = Region::interval(v, size - 1, size);
            }
            // A clause like "c <= max" is vacuous and would leave fewer than
            // k columns constrained; redraw those along with zero-count draws.
            if (q.n_constrained() == k && exact_count(table, q) > 0) break;
        }
        out.push_back(std::move(q));
    }
    return out;
}

int64_t exact_count(const Table& table, const RangeQuery& query) {
    if (query.regions.size() != static_cast<size_t>(table.n_cols()))
        fail_invalid("query does not match the table's column count");
    int64_t hits = 0;
    for (int64_t r = 0; r < table.n_rows(); ++r) hits += query.matches(table.row(r)) ? 1 : 0;
    return hits;
}

void save_workload(const std::string& path, const Table& table,
                   const std::vector<RangeQuery>& queries) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail_io("cannot write workload file '" + path + "'");
    out << "varskip-workload v1\n";
    out << "table=" << table.name() << " rows=" << table.n_rows()
        << " queries=" << queries.size() << "\n";
    for (const RangeQuery& q : queries)
        out << exact_count(table, q) << "\t" << format_query(q, table.columns()) << "\n";
    if (!out) fail_io("write failed for workload file '" + path + "'");
}

std::vector<RangeQuery> load_workload(const std::string& path, const Table& table) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot read workload file '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != "varskip-workload v1")
        fail_io("'" + path + "' is not a workload file");
    if (!std::getline(in, line)) fail_io("workload file truncated: missing header");
    std::istringstream hdr(line);
    std::string table_kv, rows_kv, queries_kv;
    hdr >> table_kv >> rows_kv >> queries_kv;
    const std::string want_table = "table=" + table.name();
    const std::string want_rows = "rows=" + std::to_string(table.n_rows());
    if (table_kv != want_table || rows_kv != want_rows)
        fail_invalid("workload was generated for a different table ('" + line + "')");
    if (queries_kv.rfind("queries=", 0) != 0) fail_io("malformed workload header");
    const auto n_queries = std::stoll(queries_kv.substr(8));

    std::vector<RangeQuery> out;
    for (int64_t i = 0; i < n_queries; ++i) {
        if (!std::getline(in, line)) fail_io("workload file truncated: missing queries");
        const size_t tab = line.find('\t');
        if (tab == std::string::npos) fail_io("malformed workload line: '" + line + "'");
        const int64_t count = std::stoll(line.substr(0, tab));
        RangeQuery q = parse_query(line.substr(tab + 1), table.columns());
        if (exact_count(table, q) != count)
            fail_invalid("workload does not match the table: stored count " +
                         std::to_string(count) + " for '" + line.substr(tab + 1) + "'");
        out.push_back(std::move(q));
    }
    return out;
}

}  // namespace varskip
