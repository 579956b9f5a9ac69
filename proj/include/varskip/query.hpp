#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "varskip/table.hpp"

namespace varskip {

// Predicate over one column's real vocab indices: a contiguous interval or
// an explicit sorted index set. Never empty — empty intersections are
// rejected at construction.
struct Region {
    bool unconstrained = true;
    int32_t lo = 0, hi = -1;       // interval form (used when set is empty)
    std::vector<int32_t> set;      // explicit form, sorted ascending

    static Region all();
    static Region interval(int32_t lo, int32_t hi, int32_t vocab_size);
    static Region values(std::vector<int32_t> vals, int32_t vocab_size);

    bool contains(int32_t v) const;
    int64_t width() const;  // number of indices covered
};

struct RangeQuery {
    std::vector<Region> regions;  // one per column

    int32_t n_constrained() const;
    // Ordering position index of the last constrained column, or -1.
    int32_t last_constrained_position(std::span<const int32_t> ordering) const;
    bool matches(std::span<const int32_t> row) const;
};

// Conjunctions like "col7 >= 3 AND col2 == 1". Operators ==, <=, >=, <, >.
// Literals are raw values; "#<index>" addresses a vocab slot directly
// (needed when a value itself contains spaces). Clauses on the same column
// intersect; an empty result is an error naming the column.
RangeQuery parse_query(const std::string& text, const std::vector<Column>& schema);

// Inverse of parse_query up to clause normalization (intervals become at
// most two clauses, == when the interval is a point).
std::string format_query(const RangeQuery& q, const std::vector<Column>& schema);

}  // namespace varskip
