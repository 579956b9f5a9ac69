#include "varskip/textdata.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "varskip/error.hpp"

namespace varskip {

Table make_text_table(const std::string& name, const std::vector<std::string>& strings,
                      int32_t width) {
    if (width < 1) fail_invalid("text table width must be ≥ 1");
    if (strings.empty()) fail_invalid("empty corpus");

    std::set<char> chars;
    for (const std::string& s : strings)
        for (char c : s) chars.insert(c);

    std::vector<std::string> values;
    values.emplace_back(kPadValue);
    for (char c : chars) values.emplace_back(1, c);
    Vocab vocab = Vocab::build(values);
    int32_t pad = vocab.encode(kPadValue);

    std::vector<Column> columns(static_cast<size_t>(width));
    for (int32_t c = 0; c < width; ++c) {
        columns[static_cast<size_t>(c)].name = "c" + std::to_string(c);
        columns[static_cast<size_t>(c)].vocab = vocab;
    }

    std::vector<int32_t> cells(strings.size() * static_cast<size_t>(width), pad);
    for (size_t r = 0; r < strings.size(); ++r) {
        const std::string& s = strings[r];
        size_t len = std::min(s.size(), static_cast<size_t>(width));
        for (size_t c = 0; c < len; ++c)
            cells[r * static_cast<size_t>(width) + c] = vocab.encode(std::string(1, s[c]));
    }
    return Table(name, std::move(columns), std::move(cells));
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot open '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

std::vector<std::string> text_table_strings(const Table& table) {
    std::vector<std::string> out;
    out.reserve(static_cast<size_t>(table.n_rows()));
    for (int64_t r = 0; r < table.n_rows(); ++r) {
        std::string s;
        for (int32_t c = 0; c < table.n_cols(); ++c) {
            const std::string ch = table.column(c).vocab.decode(table.cell(r, c));
            if (ch == kPadValue) break;
            s += ch;
        }
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

const char* kWords[] = {
    "archive", "atlas",  "batch",   "bundle", "cache",  "catalog", "census", "chart",
    "city",    "class",  "corpus",  "count",  "daily",  "data",    "dump",   "edge",
    "entry",   "export", "feed",    "field",  "file",   "graph",   "grid",   "group",
    "index",   "item",   "label",   "layer",  "list",   "log",     "map",    "meta",
    "node",    "notes",  "page",    "panel",  "public", "query",   "raw",    "record",
    "region",  "report", "sample",  "search", "series", "set",     "shard",  "snapshot",
    "source",  "stats",  "stream",  "table",  "tag",    "track",   "trend",  "user",
    "value",   "view",   "week",    "zone",
};
const char* kHosts[] = {"alpha", "beacon", "cedar", "delta", "ember",  "flint",
                        "gala",  "harbor", "iris",  "jade",  "keel",   "lumen",
                        "mesa",  "nova",   "opal",  "pine",  "quartz", "ridge"};
const char* kTlds[] = {".org", ".com", ".net", ".io", ".edu"};
const char* kPrefixes[] = {"www.", "", "data.", "api."};

template <size_t N>
const char* pick_skewed(const char* (&pool)[N], Rng& rng) {
    // u^2 skews toward small indices: head words appear far more often.
    double u = rng.uniform_real();
    return pool[static_cast<size_t>(u * u * N)];
}

}  // namespace

std::vector<std::string> synth_text_corpus(int64_t count, int32_t width, uint64_t seed) {
    if (count < 1) fail_invalid("corpus count must be ≥ 1");
    if (width < 8) fail_invalid("corpus width must be ≥ 8");
    Rng rng(seed);
    std::vector<std::string> out;
    out.reserve(static_cast<size_t>(count));
    for (int64_t i = 0; i < count; ++i) {
        std::string s = rng.uniform_real() < 0.7 ? "http://" : "https://";
        s += kPrefixes[rng.uniform_int(4)];
        s += pick_skewed(kHosts, rng);
        s += kTlds[rng.uniform_int(5)];
        int segs = 1 + rng.uniform_int(3);
        for (int j = 0; j < segs; ++j) {
            s += '/';
            s += pick_skewed(kWords, rng);
        }
        if (rng.uniform_real() < 0.5) s += '/' + std::to_string(rng.uniform_int(1000));
        if (static_cast<int32_t>(s.size()) > width) s.resize(static_cast<size_t>(width));
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<std::string> sample_patterns(const std::vector<std::string>& corpus, int32_t count,
                                         int32_t min_len, int32_t max_len, Rng& rng) {
    if (corpus.empty()) fail_invalid("empty corpus");
    if (min_len < 1 || max_len < min_len) fail_invalid("bad pattern length range");
    std::vector<std::string> out;
    std::set<std::string> seen;
    int guard = 0;
    while (static_cast<int32_t>(out.size()) < count) {
        if (++guard > count * 1000) fail_runtime("pattern sampling stalled (corpus too uniform)");
        const std::string& s = corpus[rng.uniform_u64(corpus.size())];
        int32_t len = min_len + rng.uniform_int(max_len - min_len + 1);
        if (static_cast<int32_t>(s.size()) < len) continue;
        int32_t start = rng.uniform_int(static_cast<int32_t>(s.size()) - len + 1);
        std::string p = s.substr(static_cast<size_t>(start), static_cast<size_t>(len));
        if (seen.insert(p).second) out.push_back(std::move(p));
    }
    return out;
}

}  // namespace varskip
