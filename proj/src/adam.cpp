#include "varskip/adam.hpp"

#include <cmath>

#include "varskip/error.hpp"

namespace varskip {

AdamState AdamState::init(std::span<DenseMatrix* const> params) {
    AdamState s;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (const DenseMatrix* p : params) {
        s.m.emplace_back(p->rows, p->cols);
        s.v.emplace_back(p->rows, p->cols);
    }
    return s;
}

void adam_step(std::span<DenseMatrix* const> params, std::span<const DenseMatrix> grads,
               AdamState& state, double lr) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        fail_invalid("adam_step: parameter/gradient/state count mismatch");
    state.step += 1;
    double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (size_t i = 0; i < params.size(); ++i) {
        DenseMatrix& p = *params[i];
        const DenseMatrix& g = grads[i];
        if (!p.same_shape(g) || !p.same_shape(state.m[i]))
            fail_invalid("adam_step: shape mismatch at parameter " + std::to_string(i));
        if (!all_finite(g)) fail_runtime("adam_step: non-finite gradient at parameter " + std::to_string(i));
        DenseMatrix& m = state.m[i];
        DenseMatrix& v = state.v[i];
        for (size_t k = 0; k < p.size(); ++k) {
            double gk = g.data[k];
            m.data[k] = state.beta1 * m.data[k] + (1.0 - state.beta1) * gk;
            v.data[k] = state.beta2 * v.data[k] + (1.0 - state.beta2) * gk * gk;
            double mhat = m.data[k] / bc1;
            double vhat = v.data[k] / bc2;
            p.data[k] -= lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

}  // namespace varskip
