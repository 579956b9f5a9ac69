#include "varskip/estimator.hpp"

#include <cmath>
#include <cstring>
#include <numeric>

#include "varskip/error.hpp"
#include "varskip/model.hpp"

namespace varskip {

namespace {

void validate_common(const ConditionalModel& model, const RangeQuery& query, int64_t budget,
                     int32_t order) {
    if (query.regions.size() != static_cast<size_t>(model.n_cols()))
        fail_invalid("query does not match the model's column count");
    if (budget < 1) fail_invalid("sample budget must be positive");
    if (order < 0 || order >= static_cast<int32_t>(model.orderings().size()))
        fail_invalid("ordering index out of range");
}

// Draw an index from the region under distribution p, which has total
// in-region mass `mass` (> 0). Falls back to the heaviest-seen index if
// floating-point slack exhausts the walk.
int32_t draw_in_region(const double* p, const Region& reg, int32_t vocab, double mass,
                       Rng& rng) {
    const double u = rng.uniform_real() * mass;
    double cum = 0.0;
    int32_t last_positive = -1;
    auto visit = [&](int32_t idx) {
        if (p[idx] > 0.0) last_positive = idx;
        cum += p[idx];
        return u < cum;
    };
    if (!reg.set.empty()) {
        for (int32_t idx : reg.set)
            if (visit(idx)) return idx;
    } else {
        const int32_t lo = reg.unconstrained ? 0 : reg.lo;
        const int32_t hi = reg.unconstrained ? vocab - 1 : reg.hi;
        for (int32_t idx = lo; idx <= hi; ++idx)
            if (visit(idx)) return idx;
    }
    return last_positive;
}

double region_mass(const double* p, const Region& reg, int32_t vocab) {
    double mass = 0.0;
    if (!reg.set.empty()) {
        for (int32_t idx : reg.set) mass += p[idx];
    } else {
        const int32_t lo = reg.unconstrained ? 0 : reg.lo;
        const int32_t hi = reg.unconstrained ? vocab - 1 : reg.hi;
        for (int32_t idx = lo; idx <= hi; ++idx) mass += p[idx];
    }
    return mass;
}

void finish_from_weights(Estimate& est, std::vector<double>& weights, bool keep_weights) {
    const auto b = static_cast<double>(est.budget);
    const double mean = std::accumulate(weights.begin(), weights.end(), 0.0) / b;
    double ss = 0.0;
    for (double w : weights) ss += (w - mean) * (w - mean);
    est.selectivity = mean;
    est.std_error = est.budget > 1 ? std::sqrt(ss / (b - 1.0) / b) : 0.0;
    if (keep_weights) est.weights = std::move(weights);
}

}  // namespace

Estimate progressive_sample(const ConditionalModel& model, const RangeQuery& query,
                            int64_t budget, Rng& rng, bool skipping, int32_t order,
                            bool keep_weights) {
    validate_common(model, query, budget, order);
    if (skipping && !model.mask_trained())
        fail_invalid("variable skipping needs a model trained with masked inputs");
    const int32_t n = model.n_cols();
    const Ordering& ord = model.orderings()[static_cast<size_t>(order)];

    std::vector<int32_t> eval;  // ordering positions to evaluate, ascending
    if (skipping) {
        for (int32_t k = 0; k < n; ++k)
            if (!query.regions[static_cast<size_t>(ord[static_cast<size_t>(k)])].unconstrained)
                eval.push_back(k);
    } else {
        const int32_t last = query.last_constrained_position(ord);
        for (int32_t k = 0; k <= last; ++k) eval.push_back(k);
    }

    Estimate est;
    est.budget = budget;
    if (eval.empty()) {
        est.selectivity = 1.0;
        if (keep_weights) est.weights.assign(static_cast<size_t>(budget), 1.0);
        return est;
    }

    std::vector<double> weights(static_cast<size_t>(budget), 1.0);
    std::vector<int32_t> codes(static_cast<size_t>(budget * n), kMaskCode);
    std::vector<int64_t> alive(static_cast<size_t>(budget));
    std::iota(alive.begin(), alive.end(), int64_t{0});
    std::vector<int32_t> gather;
    std::vector<int64_t> next_alive;

    for (size_t ei = 0; ei < eval.size(); ++ei) {
        const int32_t k = eval[ei];
        const int32_t col = ord[static_cast<size_t>(k)];
        const Region& reg = query.regions[static_cast<size_t>(col)];
        const bool sample_needed = ei + 1 < eval.size();
        const auto m = static_cast<int64_t>(alive.size());

        gather.resize(static_cast<size_t>(m * n));
        for (int64_t j = 0; j < m; ++j)
            std::memcpy(gather.data() + j * n, codes.data() + alive[static_cast<size_t>(j)] * n,
                        sizeof(int32_t) * static_cast<size_t>(n));
        const DenseMatrix dist = model.conditional(gather, m, k, order);
        est.forward_passes += m;
        const auto vocab = static_cast<int32_t>(dist.cols);

        next_alive.clear();
        for (int64_t j = 0; j < m; ++j) {
            const int64_t r = alive[static_cast<size_t>(j)];
            const double* p = dist.row(j);
            const double mass = region_mass(p, reg, vocab);
            if (!reg.unconstrained) {
                weights[static_cast<size_t>(r)] *= mass;
                if (mass == 0.0) continue;  // dead end: nothing in range
            }
            if (sample_needed)
                codes[static_cast<size_t>(r * n + col)] = draw_in_region(p, reg, vocab, mass, rng);
            next_alive.push_back(r);
        }
        alive.swap(next_alive);
        if (alive.empty()) break;
    }

    finish_from_weights(est, weights, keep_weights);
    return est;
}

Estimate naive_sample(const ConditionalModel& model, const RangeQuery& query, int64_t budget,
                      Rng& rng, int32_t order) {
    validate_common(model, query, budget, order);
    const int32_t n = model.n_cols();
    const Ordering& ord = model.orderings()[static_cast<size_t>(order)];

    std::vector<int32_t> codes(static_cast<size_t>(budget * n), kMaskCode);
    Estimate est;
    est.budget = budget;
    Region full = Region::all();
    for (int32_t k = 0; k < n; ++k) {
        const DenseMatrix dist = model.conditional(codes, budget, k, order);
        est.forward_passes += budget;
        const auto vocab = static_cast<int32_t>(dist.cols);
        const int32_t col = ord[static_cast<size_t>(k)];
        for (int64_t r = 0; r < budget; ++r) {
            const double* p = dist.row(r);
            const double mass = region_mass(p, full, vocab);
            codes[static_cast<size_t>(r * n + col)] = draw_in_region(p, full, vocab, mass, rng);
        }
    }

    int64_t hits = 0;
    for (int64_t r = 0; r < budget; ++r)
        hits += query.matches({codes.data() + r * n, static_cast<size_t>(n)}) ? 1 : 0;
    const double p_hat = static_cast<double>(hits) / static_cast<double>(budget);
    est.selectivity = p_hat;
    est.std_error = std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(budget));
    return est;
}

Estimate ensemble_estimate(const ConditionalModel& model, const RangeQuery& query,
                           int64_t budget, Rng& rng, bool skipping, bool keep_weights) {
    const auto n_orders = static_cast<int64_t>(model.orderings().size());
    if (budget < n_orders) fail_invalid("sample budget smaller than the number of orderings");

    Estimate est;
    est.budget = budget;
    const bool retain = keep_weights && budget % n_orders == 0;
    double sel_sum = 0.0, var_sum = 0.0;
    for (int64_t i = 0; i < n_orders; ++i) {
        const int64_t share = budget / n_orders + (i < budget % n_orders ? 1 : 0);
        Estimate part = progressive_sample(model, query, share, rng, skipping,
                                           static_cast<int32_t>(i), retain);
        sel_sum += part.selectivity;
        var_sum += part.std_error * part.std_error;
        est.forward_passes += part.forward_passes;
        if (retain)
            est.weights.insert(est.weights.end(), part.weights.begin(), part.weights.end());
    }
    est.selectivity = sel_sum / static_cast<double>(n_orders);
    est.std_error = std::sqrt(var_sum) / static_cast<double>(n_orders);
    return est;
}

int64_t forward_pass_cost(const RangeQuery& query, std::span<const int32_t> ordering,
                          bool skipping) {
    if (skipping) return query.n_constrained();
    const int32_t last = query.last_constrained_position(ordering);
    return last < 0 ? 0 : last + 1;
}

}  // namespace varskip
