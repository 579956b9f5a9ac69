#include "varskip/made.hpp"

#include <numeric>

#include "varskip/error.hpp"

namespace varskip {

Ordering identity_ordering(int32_t n) {
    Ordering o(static_cast<size_t>(n));
    std::iota(o.begin(), o.end(), 0);
    return o;
}

Ordering random_ordering(int32_t n, Rng& rng) {
    Ordering o = identity_ordering(n);
    for (int32_t i = n - 1; i > 0; --i) {
        int32_t j = rng.uniform_int(i + 1);
        std::swap(o[static_cast<size_t>(i)], o[static_cast<size_t>(j)]);
    }
    return o;
}

MadeMasks build_made_masks(int32_t n, int32_t d_emb, int32_t hidden, const Ordering& ordering) {
    if (n < 1 || d_emb < 1 || hidden < 1) fail_invalid("build_made_masks: bad dimensions");
    if (static_cast<int32_t>(ordering.size()) != n)
        fail_invalid("build_made_masks: ordering length != n");
    std::vector<int32_t> pos(static_cast<size_t>(n), -1);
    for (int32_t k = 0; k < n; ++k) {
        int32_t c = ordering[static_cast<size_t>(k)];
        if (c < 0 || c >= n || pos[static_cast<size_t>(c)] != -1)
            fail_invalid("build_made_masks: not a permutation");
        pos[static_cast<size_t>(c)] = k;
    }

    MadeMasks m;
    m.input = DenseMatrix(static_cast<int64_t>(n) * d_emb, hidden);
    m.hidden = DenseMatrix(hidden, hidden);
    m.output = DenseMatrix(hidden, static_cast<int64_t>(n) * d_emb);

    if (n == 1) {
        // Single column: position 0 conditions on nothing. Input and output
        // masks stay zero; the trunk may pass anything among itself.
        m.hidden.fill(1.0);
        return m;
    }
    if (hidden < n - 1)
        fail_invalid("hidden width " + std::to_string(hidden) + " cannot hold all " +
                     std::to_string(n - 1) + " degrees");

    std::vector<int32_t> hd(static_cast<size_t>(hidden));
    for (int32_t u = 0; u < hidden; ++u) hd[static_cast<size_t>(u)] = 1 + u % (n - 1);

    for (int32_t c = 0; c < n; ++c) {
        int32_t deg_in = pos[static_cast<size_t>(c)] + 1;
        for (int32_t e = 0; e < d_emb; ++e) {
            int64_t i = static_cast<int64_t>(c) * d_emb + e;
            for (int32_t u = 0; u < hidden; ++u)
                if (hd[static_cast<size_t>(u)] >= deg_in) m.input.at(i, u) = 1.0;
        }
    }
    for (int32_t u = 0; u < hidden; ++u)
        for (int32_t v = 0; v < hidden; ++v)
            if (hd[static_cast<size_t>(v)] >= hd[static_cast<size_t>(u)]) m.hidden.at(u, v) = 1.0;
    for (int32_t c = 0; c < n; ++c) {
        int32_t k = pos[static_cast<size_t>(c)];
        for (int32_t e = 0; e < d_emb; ++e) {
            int64_t o = static_cast<int64_t>(c) * d_emb + e;
            for (int32_t u = 0; u < hidden; ++u)
                if (hd[static_cast<size_t>(u)] <= k) m.output.at(u, o) = 1.0;
        }
    }
    return m;
}

}  // namespace varskip
