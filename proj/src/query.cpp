#include "varskip/query.hpp"

#include <algorithm>
#include <sstream>

#include "varskip/error.hpp"

namespace varskip {

Region Region::all() { return Region{}; }

Region Region::interval(int32_t lo, int32_t hi, int32_t vocab_size) {
    if (lo < 0 || hi >= vocab_size || lo > hi) fail_invalid("empty or out-of-range region");
    Region r;
    r.lo = lo;
    r.hi = hi;
    r.unconstrained = (lo == 0 && hi == vocab_size - 1);
    return r;
}

Region Region::values(std::vector<int32_t> vals, int32_t vocab_size) {
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    if (vals.empty()) fail_invalid("empty region");
    if (vals.front() < 0 || vals.back() >= vocab_size) fail_invalid("region index out of range");
    Region r;
    r.unconstrained = static_cast<int32_t>(vals.size()) == vocab_size;
    r.set = std::move(vals);
    return r;
}

bool Region::contains(int32_t v) const {
    if (unconstrained) return true;
    if (!set.empty()) return std::binary_search(set.begin(), set.end(), v);
    return v >= lo && v <= hi;
}

int64_t Region::width() const {
    if (!set.empty()) return static_cast<int64_t>(set.size());
    return static_cast<int64_t>(hi) - lo + 1;
}

int32_t RangeQuery::n_constrained() const {
    int32_t k = 0;
    for (const Region& r : regions)
        if (!r.unconstrained) ++k;
    return k;
}

int32_t RangeQuery::last_constrained_position(std::span<const int32_t> ordering) const {
    int32_t last = -1;
    for (int32_t k = 0; k < static_cast<int32_t>(ordering.size()); ++k)
        if (!regions[static_cast<size_t>(ordering[static_cast<size_t>(k)])].unconstrained) last = k;
    return last;
}

bool RangeQuery::matches(std::span<const int32_t> row) const {
    for (size_t c = 0; c < regions.size(); ++c)
        if (!regions[c].contains(row[c])) return false;
    return true;
}

namespace {

bool value_less(const Vocab& vocab, const std::string& a, const std::string& b) {
    if (vocab.numeric()) {
        double na = *parse_number(a), nb = *parse_number(b);
        if (na != nb) return na < nb;
    }
    return a < b;
}

// First index with value >= lit under the vocab's order, and first with
// value > lit. Works for literals absent from the vocab.
std::pair<int32_t, int32_t> bounds_for(const Vocab& vocab, const std::string& lit) {
    if (vocab.numeric() && !parse_number(lit))
        fail_invalid("literal '" + lit + "' is not numeric but the column is");
    const auto& vals = vocab.values();
    int32_t lb = static_cast<int32_t>(
        std::lower_bound(vals.begin(), vals.end(), lit,
                         [&](const std::string& v, const std::string& l) {
                             return value_less(vocab, v, l);
                         }) -
        vals.begin());
    int32_t ub = static_cast<int32_t>(
        std::upper_bound(vals.begin(), vals.end(), lit,
                         [&](const std::string& l, const std::string& v) {
                             return value_less(vocab, l, v);
                         }) -
        vals.begin());
    return {lb, ub};
}

Region clause_region(const Vocab& vocab, const std::string& op, const std::string& lit,
                     const std::string& col_name) {
    const int32_t v = vocab.size();
    int32_t lo = 0, hi = v - 1;

    auto from_index = [&](int32_t idx) {
        if (idx < 0 || idx >= v)
            fail_invalid("index literal #" + std::to_string(idx) + " out of range for column '" +
                         col_name + "'");
        return idx;
    };

    int32_t lb, ub;
    if (!lit.empty() && lit[0] == '#') {
        size_t used = 0;
        int32_t idx;
        try {
            idx = std::stoi(lit.substr(1), &used);
        } catch (const std::exception&) {
            fail_invalid("bad index literal '" + lit + "'");
        }
        if (used + 1 != lit.size()) fail_invalid("bad index literal '" + lit + "'");
        lb = from_index(idx);
        ub = lb + 1;
    } else {
        std::tie(lb, ub) = bounds_for(vocab, lit);
        if (op == "==" && lb == ub)
            fail_invalid("empty region for column '" + col_name + "': value '" + lit +
                         "' not present");
    }

    if (op == "==") {
        lo = lb;
        hi = ub - 1;
    } else if (op == "<=") {
        hi = ub - 1;
    } else if (op == ">=") {
        lo = lb;
    } else if (op == "<") {
        hi = lb - 1;
    } else if (op == ">") {
        lo = ub;
    } else {
        fail_invalid("unknown operator '" + op + "'");
    }
    if (lo > hi || hi < 0 || lo >= v)
        fail_invalid("empty region for column '" + col_name + "'");
    return Region::interval(lo, hi, v);
}

}  // namespace

RangeQuery parse_query(const std::string& text, const std::vector<Column>& schema) {
    RangeQuery q;
    q.regions.assign(schema.size(), Region::all());

    std::istringstream in(text);
    std::vector<std::string> tokens;
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    if (tokens.empty()) return q;

    size_t i = 0;
    while (i < tokens.size()) {
        if (i + 3 > tokens.size())
            fail_invalid("incomplete clause near '" + tokens[i] + "' (want: column op literal)");
        const std::string& name = tokens[i];
        const std::string& op = tokens[i + 1];
        const std::string& lit = tokens[i + 2];
        i += 3;
        if (i < tokens.size()) {
            if (tokens[i] != "AND" && tokens[i] != "and")
                fail_invalid("expected AND, got '" + tokens[i] + "'");
            ++i;
            if (i == tokens.size()) fail_invalid("dangling AND at end of query");
        }

        size_t c = 0;
        for (; c < schema.size(); ++c)
            if (schema[c].name == name) break;
        if (c == schema.size()) fail_invalid("unknown column '" + name + "' in query");

        Region add = clause_region(schema[c].vocab, op, lit, name);
        Region& cur = q.regions[c];
        int32_t v = schema[c].vocab.size();
        int32_t lo = std::max(cur.unconstrained ? 0 : cur.lo, add.unconstrained ? 0 : add.lo);
        int32_t hi = std::min(cur.unconstrained ? v - 1 : cur.hi,
                              add.unconstrained ? v - 1 : add.hi);
        if (lo > hi) fail_invalid("empty region for column '" + name + "'");
        cur = Region::interval(lo, hi, v);
    }
    return q;
}

std::string format_query(const RangeQuery& q, const std::vector<Column>& schema) {
    if (q.regions.size() != schema.size()) fail_invalid("query does not match schema");
    std::string out;
    auto emit = [&](const std::string& name, const char* op, const Vocab& vocab, int32_t idx) {
        if (!out.empty()) out += " AND ";
        const std::string& raw = vocab.value(idx);
        bool safe = !raw.empty() && raw[0] != '#' &&
                    raw.find_first_of(" \t\r\n") == std::string::npos;
        out += name;
        out += ' ';
        out += op;
        out += ' ';
        out += safe ? raw : "#" + std::to_string(idx);
    };
    for (size_t c = 0; c < q.regions.size(); ++c) {
        const Region& r = q.regions[c];
        if (r.unconstrained) continue;
        if (!r.set.empty()) fail_invalid("cannot format an explicit-set region");
        const Column& col = schema[c];
        int32_t v = col.vocab.size();
        if (r.lo == r.hi) {
            emit(col.name, "==", col.vocab, r.lo);
        } else {
            if (r.lo > 0) emit(col.name, ">=", col.vocab, r.lo);
            if (r.hi < v - 1) emit(col.name, "<=", col.vocab, r.hi);
        }
    }
    return out;
}

}  // namespace varskip
