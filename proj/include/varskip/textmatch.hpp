#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "varskip/bench.hpp"
#include "varskip/conditional.hpp"
#include "varskip/rng.hpp"
#include "varskip/table.hpp"
#include "varskip/vocab.hpp"

namespace varskip {

// CONTAINS pattern over a fixed-width text model: char vocab indices, no
// PAD or MASK characters.
struct Pattern {
    std::vector<int32_t> chars;

    int32_t length() const { return static_cast<int32_t>(chars.size()); }
};

// Byte-per-character parse against the shared char vocab; unknown
// characters are errors.
Pattern parse_pattern(const std::string& text, const Vocab& char_vocab);

struct MatchEstimate {
    double probability = 0.0;
    std::vector<double> first_terms;  // P(m(x_i)) per start position, exact chains
    int64_t second_term_budget = 0;   // continuation samples per position
    int64_t forward_passes = 0;
    double std_error = 0.0;           // from the sampled second terms only
};

// P(pattern matches at `start`), conditioning on a fully masked prefix:
// exactly L conditional evaluations thanks to prefix skipping. Needs a
// prefix-mask trained model; `start` is 0-based, start + L ≤ W.
double position_match_prob(const ConditionalModel& model, const Pattern& pattern,
                           int32_t start);

// Position-sum estimator: sum_i P(m(x_i)) · (1 − P(later match | m(x_i))).
// First terms are exact conditional chains; the later-match correction is
// estimated per position from budget/(W−L+1) sampled continuations. A match
// never spans or follows the string end (first PAD character).
MatchEstimate contains_prob(const ConditionalModel& model, const Pattern& pattern,
                            int64_t budget, Rng& rng);

// Strawman: ancestral-sample whole strings, count the fraction containing
// the pattern.
MatchEstimate naive_contains(const ConditionalModel& model, const Pattern& pattern,
                             int64_t budget, Rng& rng);

// Scan oracle: rows of a text table whose string contains the pattern (same
// string-end rule as the estimators).
int64_t exact_contains_count(const Table& table, const Pattern& pattern);

struct TextBenchSpec {
    int64_t budget = 1000;
    uint64_t seed = 0;
    int32_t resamples = 1000;
    int32_t workers = 0;

    void validate() const;
};

struct PatternRow {
    std::string pattern;
    double actual = 0.0;  // scan-oracle match fraction
    MatchEstimate skipping;
    MatchEstimate naive;
    double q_skipping = 1.0;
    double q_naive = 1.0;
    double wall_ms = 0.0;  // meta only
};

struct TextBenchReport {
    std::string table_name;
    int64_t table_rows = 0;
    int32_t width = 0;
    int64_t budget = 0;
    uint64_t seed = 0;
    QuantileBlock skip_quant, naive_quant;  // q-error quantiles per estimator
    std::vector<PatternRow> rows;
};

// Position-sum estimator vs the naive baseline on one pattern set, q-errors
// against the scan oracle. Patterns run in parallel; per-pattern RNG streams
// keep the report independent of the worker count.
TextBenchReport run_text_bench(const ConditionalModel& model, const Table& table,
                               const std::vector<std::string>& patterns,
                               const TextBenchSpec& spec);

// Same data/meta split as the range bench: the data block is byte-stable
// for fixed inputs, wall times live in meta.
std::string text_bench_json(const TextBenchReport& report);
std::string text_bench_json_data(const TextBenchReport& report);
std::string text_bench_text(const TextBenchReport& report);

}  // namespace varskip
