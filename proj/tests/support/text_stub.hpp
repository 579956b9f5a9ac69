#pragma once

#include <string>
#include <vector>

#include "varskip/conditional.hpp"
#include "varskip/error.hpp"
#include "varskip/table.hpp"

namespace varskip::testing {

// Product distribution over fixed-width strings: each position draws its
// character independently from a per-position distribution, making every
// containment probability computable by brute-force enumeration. Counts
// conditional() calls so tests can pin forward-pass economics.
class TextStub : public ConditionalModel {
public:
    TextStub(std::vector<std::string> alphabet, std::vector<std::vector<double>> pos_probs)
        : probs_(std::move(pos_probs)) {
        Vocab vocab = Vocab::build(alphabet);
        for (size_t p = 0; p < probs_.size(); ++p) {
            if (probs_[p].size() != static_cast<size_t>(vocab.size()))
                fail_invalid("stub distribution does not match the alphabet");
            schema_.push_back({"c" + std::to_string(p), vocab});
        }
        orderings_.push_back(identity_ordering(static_cast<int32_t>(probs_.size())));
    }

    static TextStub uniform(int32_t width, std::vector<std::string> alphabet) {
        std::vector<std::vector<double>> probs(
            static_cast<size_t>(width),
            std::vector<double>(alphabet.size(), 1.0 / static_cast<double>(alphabet.size())));
        return TextStub(std::move(alphabet), std::move(probs));
    }

    int32_t n_cols() const override { return static_cast<int32_t>(schema_.size()); }
    const std::vector<Column>& schema() const override { return schema_; }
    const std::vector<Ordering>& orderings() const override { return orderings_; }
    bool mask_trained() const override { return true; }

    DenseMatrix conditional(std::span<const int32_t>, int64_t batch, int32_t position,
                            int32_t) const override {
        ++calls;
        const auto& p = probs_[static_cast<size_t>(position)];
        DenseMatrix out(batch, static_cast<int64_t>(p.size()));
        for (int64_t b = 0; b < batch; ++b)
            std::copy(p.begin(), p.end(), out.row(b));
        return out;
    }

    // P(string contains pattern), exact, by enumerating all A^W strings.
    // PAD-free alphabets only.
    double enumerate_contains(const std::vector<int32_t>& pattern) const {
        const auto w = static_cast<int32_t>(probs_.size());
        const auto a = static_cast<int32_t>(probs_[0].size());
        const auto L = static_cast<int32_t>(pattern.size());
        std::vector<int32_t> s(static_cast<size_t>(w), 0);
        double total = 0.0;
        for (;;) {
            bool hit = false;
            for (int32_t j = 0; !hit && j + L <= w; ++j) {
                hit = true;
                for (int32_t t = 0; t < L; ++t)
                    if (s[static_cast<size_t>(j + t)] != pattern[static_cast<size_t>(t)]) {
                        hit = false;
                        break;
                    }
            }
            if (hit) {
                double p = 1.0;
                for (int32_t i = 0; i < w; ++i)
                    p *= probs_[static_cast<size_t>(i)][static_cast<size_t>(s[static_cast<size_t>(i)])];
                total += p;
            }
            int32_t i = 0;
            for (; i < w; ++i) {
                if (++s[static_cast<size_t>(i)] < a) break;
                s[static_cast<size_t>(i)] = 0;
            }
            if (i == w) break;
        }
        return total;
    }

    mutable int64_t calls = 0;

private:
    std::vector<Column> schema_;
    std::vector<Ordering> orderings_;
    std::vector<std::vector<double>> probs_;
};

}  // namespace varskip::testing
