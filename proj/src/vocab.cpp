#include "varskip/vocab.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>

#include "varskip/error.hpp"

namespace varskip {

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) return std::nullopt;
    return v;
}

Vocab Vocab::build(const std::vector<std::string>& raw) {
    Vocab v;
    v.values_ = raw;
    std::sort(v.values_.begin(), v.values_.end());
    v.values_.erase(std::unique(v.values_.begin(), v.values_.end()), v.values_.end());

    v.numeric_ = !v.values_.empty() &&
                 std::all_of(v.values_.begin(), v.values_.end(),
                             [](const std::string& s) { return parse_number(s).has_value(); });
    if (v.numeric_) {
        // Numeric order, string as tie-break ("01" vs "1") to keep strictness.
        std::sort(v.values_.begin(), v.values_.end(),
                  [](const std::string& a, const std::string& b) {
                      double na = *parse_number(a), nb = *parse_number(b);
                      if (na != nb) return na < nb;
                      return a < b;
                  });
    }
    return v;
}

const std::string& Vocab::value(int32_t index) const {
    if (index < 0 || index >= size())
        fail_invalid("vocab value index out of range: " + std::to_string(index));
    return values_[static_cast<size_t>(index)];
}

std::optional<int32_t> Vocab::find(const std::string& raw) const {
    if (numeric_) {
        auto n = parse_number(raw);
        if (!n) return std::nullopt;
        // Linear probe within the equal-number run found by binary search.
        auto it = std::lower_bound(values_.begin(), values_.end(), *n,
                                   [](const std::string& s, double x) { return *parse_number(s) < x; });
        for (; it != values_.end() && *parse_number(*it) == *n; ++it)
            if (*it == raw) return static_cast<int32_t>(it - values_.begin());
        return std::nullopt;
    }
    auto it = std::lower_bound(values_.begin(), values_.end(), raw);
    if (it == values_.end() || *it != raw) return std::nullopt;
    return static_cast<int32_t>(it - values_.begin());
}

int32_t Vocab::encode(const std::string& raw) const {
    auto idx = find(raw);
    if (!idx) fail_invalid("value not in vocabulary: '" + raw + "'");
    return *idx;
}

std::string Vocab::decode(int32_t index) const {
    if (index == mask_index()) return kMaskSentinel;
    if (index < 0 || index > mask_index())
        fail_invalid("decode index out of range: " + std::to_string(index));
    return values_[static_cast<size_t>(index)];
}

}  // namespace varskip
