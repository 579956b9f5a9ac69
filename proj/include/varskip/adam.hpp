#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "varskip/matrix.hpp"

namespace varskip {

// Bias-corrected Adam over a fixed set of parameter tensors.
struct AdamState {
    std::vector<DenseMatrix> m;  // first moments, shapes mirror params
    std::vector<DenseMatrix> v;  // second moments
    int64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState init(std::span<DenseMatrix* const> params);
};

// One update: params[i] -= lr * m̂ / (sqrt(v̂) + eps). Errors on non-finite
// gradients or shape drift.
void adam_step(std::span<DenseMatrix* const> params, std::span<const DenseMatrix> grads,
               AdamState& state, double lr);

}  // namespace varskip
