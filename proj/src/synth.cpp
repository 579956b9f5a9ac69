#include "varskip/synth.hpp"

#include <algorithm>
#include <string>

#include "varskip/error.hpp"
#include "varskip/rng.hpp"

namespace varskip {

namespace {

void check_spec(const SynthSpec& spec) {
    if (spec.n_cols < 1) fail_invalid("synth: n_cols must be ≥ 1");
    if (static_cast<int32_t>(spec.domains.size()) != spec.n_cols)
        fail_invalid("synth: need one domain size per column");
    for (int32_t d : spec.domains)
        if (d < 2) fail_invalid("synth: domain sizes must be ≥ 2");
    if (spec.n_rows < 1) fail_invalid("synth: n_rows must be ≥ 1");
    if (spec.depth < 1 || spec.depth > spec.n_cols)
        fail_invalid("synth: depth must be in [1, n_cols]");
    if (spec.noise < 0.0 || spec.noise > 1.0) fail_invalid("synth: noise must be in [0, 1]");
}

}  // namespace

Table synth_table(const SynthSpec& spec) {
    check_spec(spec);
    const int32_t n = spec.n_cols;
    const int32_t depth = spec.depth;
    Rng rng(spec.seed);

    // Mixing coefficients for the derived columns, drawn once.
    std::vector<std::vector<int64_t>> coef(static_cast<size_t>(n));
    std::vector<int64_t> offset(static_cast<size_t>(n), 0);
    for (int32_t c = depth; c < n; ++c) {
        coef[static_cast<size_t>(c)].resize(static_cast<size_t>(depth));
        for (int32_t f = 0; f < depth; ++f)
            coef[static_cast<size_t>(c)][static_cast<size_t>(f)] = 1 + rng.uniform_int(7);
        offset[static_cast<size_t>(c)] = rng.uniform_int(spec.domains[static_cast<size_t>(c)]);
    }

    std::vector<int32_t> raw(static_cast<size_t>(spec.n_rows) * static_cast<size_t>(n));
    std::vector<int64_t> z(static_cast<size_t>(depth));
    for (int64_t r = 0; r < spec.n_rows; ++r) {
        for (int32_t f = 0; f < depth; ++f)
            z[static_cast<size_t>(f)] = rng.uniform_int(spec.domains[static_cast<size_t>(f)]);
        for (int32_t c = 0; c < n; ++c) {
            int64_t d = spec.domains[static_cast<size_t>(c)];
            int64_t v;
            if (c < depth) {
                v = z[static_cast<size_t>(c)];
            } else {
                v = offset[static_cast<size_t>(c)];
                for (int32_t f = 0; f < depth; ++f)
                    v += coef[static_cast<size_t>(c)][static_cast<size_t>(f)] * z[static_cast<size_t>(f)];
                v %= d;
            }
            if (spec.noise > 0.0 && rng.uniform_real() < spec.noise)
                v = rng.uniform_int(static_cast<int>(d));
            raw[static_cast<size_t>(r) * static_cast<size_t>(n) + static_cast<size_t>(c)] =
                static_cast<int32_t>(v);
        }
    }

    // Dictionary-encode against the observed domain of each column.
    std::vector<Column> columns(static_cast<size_t>(n));
    std::vector<std::vector<int32_t>> distinct(static_cast<size_t>(n));
    for (int32_t c = 0; c < n; ++c) {
        auto& d = distinct[static_cast<size_t>(c)];
        for (int64_t r = 0; r < spec.n_rows; ++r)
            d.push_back(raw[static_cast<size_t>(r) * static_cast<size_t>(n) + static_cast<size_t>(c)]);
        std::sort(d.begin(), d.end());
        d.erase(std::unique(d.begin(), d.end()), d.end());
        std::vector<std::string> values(d.size());
        for (size_t i = 0; i < d.size(); ++i) values[i] = std::to_string(d[i]);
        columns[static_cast<size_t>(c)].name = "col" + std::to_string(c);
        columns[static_cast<size_t>(c)].vocab = Vocab::build(values);
    }

    std::vector<int32_t> cells(raw.size());
    for (int64_t r = 0; r < spec.n_rows; ++r)
        for (int32_t c = 0; c < n; ++c) {
            const auto& d = distinct[static_cast<size_t>(c)];
            size_t i = static_cast<size_t>(r) * static_cast<size_t>(n) + static_cast<size_t>(c);
            cells[i] = static_cast<int32_t>(
                std::lower_bound(d.begin(), d.end(), raw[i]) - d.begin());
        }

    return Table("synth", std::move(columns), std::move(cells));
}

}  // namespace varskip
