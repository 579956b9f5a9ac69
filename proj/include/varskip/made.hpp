#pragma once

#include <cstdint>
#include <vector>

#include "varskip/matrix.hpp"
#include "varskip/rng.hpp"

namespace varskip {

// ordering[k] = column id placed at autoregressive position k.
using Ordering = std::vector<int32_t>;

Ordering identity_ordering(int32_t n);
Ordering random_ordering(int32_t n, Rng& rng);

// Binary connectivity masks (stored as 0.0/1.0) realizing the autoregressive
// property for one ordering. Input features stay in natural column order;
// the ordering lives entirely in the masks, which is what lets several
// orderings share one weight matrix in multi-order models.
struct MadeMasks {
    DenseMatrix input;   // (n*d_emb) × hidden
    DenseMatrix hidden;  // hidden × hidden, shared by every trunk layer
    DenseMatrix output;  // hidden × (n*d_emb)
};

// Degree scheme: the input block of the column at position k carries degree
// k+1; hidden units cycle through degrees 1..n-1; a hidden unit of degree m
// sees inputs with degree ≤ m, and the output block at position k sees
// hidden degrees ≤ k. Residual adds are degree-preserving because every
// trunk layer uses the same degree assignment.
MadeMasks build_made_masks(int32_t n, int32_t d_emb, int32_t hidden, const Ordering& ordering);

}  // namespace varskip
