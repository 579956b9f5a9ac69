#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace varskip {

// Sentinel returned when decoding a MASK index.
inline constexpr const char* kMaskSentinel = "\xE2\x9F\xA8MASK\xE2\x9F\xA9";  // ⟨MASK⟩

// Dictionary for one column. Real values get indices 0..size-1 in natural
// order (numeric when every value parses as a number, else lexicographic);
// the index equal to size() is reserved for the MASK token and never appears
// in stored data.
class Vocab {
public:
    Vocab() = default;

    // Build from raw cell values (duplicates fine).
    static Vocab build(const std::vector<std::string>& raw);

    int32_t size() const { return static_cast<int32_t>(values_.size()); }
    int32_t mask_index() const { return size(); }
    bool numeric() const { return numeric_; }

    const std::vector<std::string>& values() const { return values_; }
    const std::string& value(int32_t index) const;

    // Index of a raw value, or nullopt if absent.
    std::optional<int32_t> find(const std::string& raw) const;
    // Like find() but throws a named error when absent.
    int32_t encode(const std::string& raw) const;
    // Raw value for an index; mask_index decodes to the MASK sentinel.
    // Indices past mask_index are an error.
    std::string decode(int32_t index) const;

private:
    std::vector<std::string> values_;
    bool numeric_ = false;
};

// Strict full-token numeric parse ("12", "-3.5e2"); rejects "12x", "".
std::optional<double> parse_number(const std::string& s);

}  // namespace varskip
