#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "varskip/made.hpp"
#include "varskip/matrix.hpp"
#include "varskip/table.hpp"

namespace varskip {

// What the samplers need from a density model: per-position conditional
// distributions. Implemented by ArModel and by the exact table-scan stubs
// used to validate estimator math independently of training quality.
class ConditionalModel {
public:
    virtual ~ConditionalModel() = default;
    virtual int32_t n_cols() const = 0;
    virtual const std::vector<Column>& schema() const = 0;
    virtual const std::vector<Ordering>& orderings() const = 0;
    virtual bool mask_trained() const = 0;
    virtual bool prefix_trained() const { return mask_trained(); }
    // codes: batch × n_cols; entries are value indices, vocab size or
    // kMaskCode for MASK. Returns batch × vocab distributions for the column
    // at `position` of ordering `order`. One call == one network evaluation.
    virtual DenseMatrix conditional(std::span<const int32_t> codes, int64_t batch,
                                    int32_t position, int32_t order) const = 0;
};

}  // namespace varskip
