#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "varskip/query.hpp"
#include "varskip/rng.hpp"
#include "varskip/table.hpp"

namespace varskip {

struct WorkloadSpec {
    int32_t count = 200;
    int32_t k_min = 5;   // constraints per query, clamped to the column count
    int32_t k_max = 12;

    void validate() const;
};

// Random conjunctive range queries anchored on table rows: per query draw a
// constraint count k, that many distinct columns, a pivot row, and one of
// {==, <=, >=} per column with the pivot's value as literal. The pivot row
// always matches. Draws with a zero count or with fewer than k genuinely
// constrained columns (a vacuous "c <= max" clause) are redrawn, up to 1000
// tries per query before erroring out on degenerate tables.
std::vector<RangeQuery> gen_workload(const Table& table, const WorkloadSpec& spec, Rng& rng);

// Exact scan oracle: number of rows matching the query.
int64_t exact_count(const Table& table, const RangeQuery& query);

// Text format: a version line, a header binding the workload to a table
// shape, then one "<count>\t<query>" line per query. Loading re-runs the
// scan oracle and rejects files whose counts no longer match the table.
void save_workload(const std::string& path, const Table& table,
                   const std::vector<RangeQuery>& queries);
std::vector<RangeQuery> load_workload(const std::string& path, const Table& table);

}  // namespace varskip
