#include "varskip/gradcheck.hpp"

#include <cmath>

#include "varskip/error.hpp"

namespace varskip {

std::string GradCheckReport::to_string() const {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "grad_check: max_rel_err=%.3e over %zu coords (worst param %zu[%zu]: "
                  "analytic=%.6e numeric=%.6e)",
                  max_rel_err, n_checked, worst_param, worst_coord, worst_analytic,
                  worst_numeric);
    return buf;
}

GradCheckReport grad_check(std::span<DenseMatrix* const> params,
                           std::span<const DenseMatrix> analytic,
                           const std::function<double()>& loss_fn, size_t min_coords, double h,
                           Rng& rng) {
    if (params.size() != analytic.size()) fail_invalid("grad_check: grads do not match params");
    size_t total = 0;
    for (const DenseMatrix* p : params) total += p->size();
    if (total == 0) fail_invalid("grad_check: no parameters");
    const bool sweep = min_coords >= total;  // exhaustive instead of sampled
    size_t n = sweep ? total : min_coords;

    GradCheckReport rep;
    for (size_t t = 0; t < n; ++t) {
        size_t flat = sweep ? t : static_cast<size_t>(rng.uniform_u64(total));
        size_t pi = 0;
        while (flat >= params[pi]->size()) flat -= params[pi++]->size();
        double& coord = params[pi]->data[flat];
        double saved = coord;

        coord = saved + h;
        double up = loss_fn();
        coord = saved - h;
        double down = loss_fn();
        coord = saved;

        double numeric = (up - down) / (2.0 * h);
        double a = analytic[pi].data[flat];
        double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-4});
        rep.n_checked += 1;
        if (rel > rep.max_rel_err) {
            rep.max_rel_err = rel;
            rep.worst_param = pi;
            rep.worst_coord = flat;
            rep.worst_analytic = a;
            rep.worst_numeric = numeric;
        }
    }
    return rep;
}

}  // namespace varskip
