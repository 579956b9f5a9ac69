#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "varskip/matrix.hpp"
#include "varskip/rng.hpp"

namespace varskip {

struct GradCheckReport {
    double max_rel_err = 0.0;
    size_t n_checked = 0;
    size_t worst_param = 0;   // index into params
    size_t worst_coord = 0;   // flat index within that tensor
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;

    std::string to_string() const;
};

// Central finite differences on a pseudo-random coordinate subset. `loss_fn`
// must recompute the loss from the current parameter values (same batch,
// same mask plan). Parameters are perturbed in place and restored.
GradCheckReport grad_check(std::span<DenseMatrix* const> params,
                           std::span<const DenseMatrix> analytic,
                           const std::function<double()>& loss_fn, size_t min_coords, double h,
                           Rng& rng);

}  // namespace varskip
