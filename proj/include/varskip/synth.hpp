#pragma once

#include <cstdint>
#include <vector>

#include "varskip/table.hpp"

namespace varskip {

// Latent-factor synthetic table: each row draws `depth` independent latent
// factors; column c < depth stores factor c directly, later columns are
// seeded modular mixes of all factors. `noise` is the per-cell probability
// of replacing the deterministic value with a uniform redraw.
struct SynthSpec {
    int32_t n_cols = 0;
    std::vector<int32_t> domains;  // one per column, each ≥ 2
    int64_t n_rows = 0;
    int32_t depth = 1;  // number of latent factors, 1 ≤ depth ≤ n_cols
    double noise = 0.2;
    uint64_t seed = 0;
};

Table synth_table(const SynthSpec& spec);

}  // namespace varskip
