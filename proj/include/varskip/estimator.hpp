#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "varskip/conditional.hpp"
#include "varskip/query.hpp"
#include "varskip/rng.hpp"

namespace varskip {

struct Estimate {
    double selectivity = 0.0;
    int64_t budget = 0;
    int64_t forward_passes = 0;  // network evaluations actually performed
    double std_error = 0.0;      // of the selectivity estimate
    std::vector<double> weights; // per-sample weights, kept only on request
};

// Progressive sampling: walk the ordering, at each evaluated position
// multiply each sample's weight by the in-region probability mass and draw
// the next value from the renormalized in-region conditional. With
// `skipping` only constrained positions are evaluated (unconstrained ones
// stay MASK); otherwise every position up to the last constrained one is,
// with unconstrained positions sampled from the full conditional at factor
// one. Samples hitting exactly zero in-region mass die and contribute zero.
Estimate progressive_sample(const ConditionalModel& model, const RangeQuery& query,
                            int64_t budget, Rng& rng, bool skipping, int32_t order = 0,
                            bool keep_weights = false);

// Monte Carlo strawman: ancestral-sample full rows, count matches.
Estimate naive_sample(const ConditionalModel& model, const RangeQuery& query, int64_t budget,
                      Rng& rng, int32_t order = 0);

// Average progressive estimates across every ordering of the model, the
// budget split evenly (remainder to the first orderings).
Estimate ensemble_estimate(const ConditionalModel& model, const RangeQuery& query,
                           int64_t budget, Rng& rng, bool skipping,
                           bool keep_weights = false);

// Network evaluations per sample implied by the evaluation schedule; the
// measured forward_passes of a dead-end-free run is budget times this.
int64_t forward_pass_cost(const RangeQuery& query, std::span<const int32_t> ordering,
                          bool skipping);

}  // namespace varskip
