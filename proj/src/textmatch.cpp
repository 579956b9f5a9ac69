#include "varskip/textmatch.hpp"

#include <algorithm>
#include <cmath>

#include "varskip/error.hpp"
#include "varskip/model.hpp"
#include "varskip/textdata.hpp"

namespace varskip {

namespace {

// Continuation positions are drawn from the full conditional.
int32_t draw_char(const double* p, int32_t vocab, Rng& rng) {
    double mass = 0.0;
    for (int32_t v = 0; v < vocab; ++v) mass += p[v];
    const double u = rng.uniform_real() * mass;
    double cum = 0.0;
    int32_t last_positive = 0;
    for (int32_t v = 0; v < vocab; ++v) {
        if (p[v] > 0.0) last_positive = v;
        cum += p[v];
        if (u < cum) return v;
    }
    return last_positive;
}

void check_pattern(const ConditionalModel& model, const Pattern& pattern) {
    if (!model.prefix_trained())
        fail_invalid("pattern estimation needs a prefix-mask trained model");
    if (pattern.chars.empty()) fail_invalid("empty pattern");
    for (int32_t ch : pattern.chars) {
        if (ch < 0) fail_invalid("pattern contains an invalid character index");
        for (const Column& col : model.schema())
            if (ch >= col.vocab.size())
                fail_invalid("pattern character index out of the alphabet");
    }
}

int32_t pad_index(const ConditionalModel& model) {
    const auto idx = model.schema()[0].vocab.find(kPadValue);
    return idx ? *idx : -1;  // stubs without a PAD character disable the rule
}

// First PAD at or after `from`; string ends there. `w` when absent.
int32_t string_end(const int32_t* row, int32_t w, int32_t from, int32_t pad) {
    if (pad < 0) return w;
    for (int32_t p = from; p < w; ++p)
        if (row[p] == pad) return p;
    return w;
}

bool match_at(const int32_t* row, const Pattern& pattern, int32_t j) {
    for (int32_t t = 0; t < pattern.length(); ++t)
        if (row[j + t] != pattern.chars[static_cast<size_t>(t)]) return false;
    return true;
}

}  // namespace

Pattern parse_pattern(const std::string& text, const Vocab& char_vocab) {
    if (text.empty()) fail_invalid("empty pattern");
    Pattern p;
    for (char c : text) {
        const std::string ch(1, c);
        const auto idx = char_vocab.find(ch);
        if (!idx) fail_invalid("pattern character '" + ch + "' is not in the alphabet");
        p.chars.push_back(*idx);
    }
    return p;
}

double position_match_prob(const ConditionalModel& model, const Pattern& pattern,
                           int32_t start) {
    check_pattern(model, pattern);
    const int32_t w = model.n_cols();
    const int32_t L = pattern.length();
    if (start < 0 || start + L > w) fail_invalid("pattern start position out of range");

    std::vector<int32_t> codes(static_cast<size_t>(w), kMaskCode);
    double prob = 1.0;
    for (int32_t t = 0; t < L; ++t) {
        const DenseMatrix dist = model.conditional(codes, 1, start + t, 0);
        prob *= dist.at(0, pattern.chars[static_cast<size_t>(t)]);
        codes[static_cast<size_t>(start + t)] = pattern.chars[static_cast<size_t>(t)];
    }
    return prob;
}

MatchEstimate contains_prob(const ConditionalModel& model, const Pattern& pattern,
                            int64_t budget, Rng& rng) {
    check_pattern(model, pattern);
    if (budget < 1) fail_invalid("sample budget must be positive");
    const int32_t w = model.n_cols();
    const int32_t L = pattern.length();

    MatchEstimate est;
    if (L > w) return est;  // no valid positions
    const int32_t n_pos = w - L + 1;
    est.second_term_budget = std::max<int64_t>(1, budget / n_pos);
    const int32_t pad = pad_index(model);

    std::vector<int32_t> codes;
    double variance = 0.0;
    for (int32_t i = 0; i < n_pos; ++i) {
        double first = 1.0;
        {
            codes.assign(static_cast<size_t>(w), kMaskCode);
            for (int32_t t = 0; t < L; ++t) {
                const DenseMatrix dist = model.conditional(codes, 1, i + t, 0);
                est.forward_passes += 1;
                first *= dist.at(0, pattern.chars[static_cast<size_t>(t)]);
                codes[static_cast<size_t>(i + t)] = pattern.chars[static_cast<size_t>(t)];
            }
        }
        est.first_terms.push_back(first);
        if (first < 1e-12) {  // negligible either way; skip the correction
            est.probability += first;
            continue;
        }

        // Sample continuations given (masked prefix, pattern at i) and count
        // strings with another match strictly after i.
        const int64_t k = est.second_term_budget;
        const int32_t tail_start = i + L;
        int64_t later = 0;
        if (tail_start >= w || i + 1 > w - L) {
            // No room for a later match; the correction is exactly zero.
        } else {
            std::vector<int32_t> batch(static_cast<size_t>(k * w), kMaskCode);
            for (int64_t r = 0; r < k; ++r)
                for (int32_t t = 0; t < L; ++t)
                    batch[static_cast<size_t>(r * w + i + t)] =
                        pattern.chars[static_cast<size_t>(t)];
            for (int32_t p = tail_start; p < w; ++p) {
                const DenseMatrix dist = model.conditional(batch, k, p, 0);
                est.forward_passes += k;
                const auto vocab = static_cast<int32_t>(dist.cols);
                for (int64_t r = 0; r < k; ++r)
                    batch[static_cast<size_t>(r * w + p)] = draw_char(dist.row(r), vocab, rng);
            }
            for (int64_t r = 0; r < k; ++r) {
                const int32_t* row = batch.data() + r * w;
                const int32_t end = string_end(row, w, tail_start, pad);
                for (int32_t j = i + 1; j + L <= end; ++j)
                    if (match_at(row, pattern, j)) {
                        ++later;
                        break;
                    }
            }
        }
        const double p_later = static_cast<double>(later) / static_cast<double>(k);
        est.probability += first * (1.0 - p_later);
        variance += first * first * p_later * (1.0 - p_later) / static_cast<double>(k);
    }
    est.probability = std::clamp(est.probability, 0.0, 1.0);
    est.std_error = std::sqrt(variance);
    return est;
}

int64_t exact_contains_count(const Table& table, const Pattern& pattern) {
    if (pattern.chars.empty()) fail_invalid("empty pattern");
    const int32_t w = table.n_cols();
    const int32_t L = pattern.length();
    for (int32_t ch : pattern.chars)
        for (const Column& col : table.columns())
            if (ch < 0 || ch >= col.vocab.size())
                fail_invalid("pattern character index out of the alphabet");
    if (L > w) return 0;
    const auto pad_idx = table.column(0).vocab.find(kPadValue);
    const int32_t pad = pad_idx ? *pad_idx : -1;
    int64_t hits = 0;
    for (int64_t r = 0; r < table.n_rows(); ++r) {
        const int32_t* row = table.row(r).data();
        const int32_t end = string_end(row, w, 0, pad);
        for (int32_t j = 0; j + L <= end; ++j)
            if (match_at(row, pattern, j)) {
                ++hits;
                break;
            }
    }
    return hits;
}

MatchEstimate naive_contains(const ConditionalModel& model, const Pattern& pattern,
                             int64_t budget, Rng& rng) {
    // No masking involved: every conditional sees a fully sampled prefix.
    if (pattern.chars.empty()) fail_invalid("empty pattern");
    for (int32_t ch : pattern.chars)
        for (const Column& col : model.schema())
            if (ch < 0 || ch >= col.vocab.size())
                fail_invalid("pattern character index out of the alphabet");
    if (budget < 1) fail_invalid("sample budget must be positive");
    const int32_t w = model.n_cols();
    const int32_t L = pattern.length();
    const int32_t pad = pad_index(model);

    MatchEstimate est;
    if (L > w) return est;

    std::vector<int32_t> batch(static_cast<size_t>(budget * w), kMaskCode);
    for (int32_t p = 0; p < w; ++p) {
        const DenseMatrix dist = model.conditional(batch, budget, p, 0);
        est.forward_passes += budget;
        const auto vocab = static_cast<int32_t>(dist.cols);
        for (int64_t r = 0; r < budget; ++r)
            batch[static_cast<size_t>(r * w + p)] = draw_char(dist.row(r), vocab, rng);
    }
    int64_t hits = 0;
    for (int64_t r = 0; r < budget; ++r) {
        const int32_t* row = batch.data() + r * w;
        const int32_t end = string_end(row, w, 0, pad);
        for (int32_t j = 0; j + L <= end; ++j)
            if (match_at(row, pattern, j)) {
                ++hits;
                break;
            }
    }
    const double p_hat = static_cast<double>(hits) / static_cast<double>(budget);
    est.probability = p_hat;
    est.std_error = std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(budget));
    return est;
}

}  // namespace varskip
