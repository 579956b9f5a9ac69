#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "varskip/rng.hpp"
#include "varskip/table.hpp"

namespace varskip {

// Raw value used for the PAD character (sorts first lexicographically).
inline constexpr const char* kPadValue = "";

// Fixed-width representation of a string corpus: one column per character
// position, one shared character vocab (PAD included) copied into every
// column. Strings longer than `width` are truncated, shorter ones padded.
Table make_text_table(const std::string& name, const std::vector<std::string>& strings,
                      int32_t width);

// Read one string per line (no escaping; blank lines skipped).
std::vector<std::string> read_lines(const std::string& path);

// Reconstruct corpus strings from a text table: per row, concatenate the
// decoded characters up to the first PAD.
std::vector<std::string> text_table_strings(const Table& table);

// Deterministic URL-ish corpus: scheme + host + word-pool path segments with
// a skewed word distribution, so substring frequencies span several decades.
std::vector<std::string> synth_text_corpus(int64_t count, int32_t width, uint64_t seed);

// Patterns for CONTAINS benchmarks: random substrings of random corpus
// strings with lengths in [min_len, max_len]. Deduplicated, deterministic.
std::vector<std::string> sample_patterns(const std::vector<std::string>& corpus, int32_t count,
                                         int32_t min_len, int32_t max_len, Rng& rng);

}  // namespace varskip
