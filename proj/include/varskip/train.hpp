#pragma once

#include <functional>
#include <vector>

#include "varskip/model.hpp"
#include "varskip/rng.hpp"
#include "varskip/table.hpp"

namespace varskip {

struct EpochLog {
    int32_t epoch = 0;
    double train_nll_bits = 0.0;  // masked-input training loss, bits/row
    double eval_nll_bits = 0.0;   // non-masked data, bits/row
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Full-table NLL on non-masked inputs, bits/row. Multi-order models report
// the mean over all orderings.
double eval_nll_bits(const ArModel& model, const Table& table);

// Adam training with per-batch ordering sampling, per-row mask plans and
// linear warmup. The epoch log is returned and optionally streamed.
std::vector<EpochLog> train(ArModel& model, const Table& table, Rng& rng,
                            const EpochCallback& cb = {});

}  // namespace varskip
