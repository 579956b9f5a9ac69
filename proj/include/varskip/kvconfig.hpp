#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace varskip {

// Flat key=value configuration. One "key=value" pair per line (files) or per
// token (CLI args / packed strings). Values with whitespace are double-quoted:
// key="a b". '#' at a token boundary starts a comment, blank lines are
// skipped. Keys are [a-z0-9_]. Later assignments override earlier ones.
class KvConfig {
public:
    KvConfig() = default;

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }

    // Parse "k=v" tokens separated by whitespace/newlines. Throws on
    // malformed tokens.
    void parse(const std::string& text);
    void parse_file(const std::string& path);

    // Override from environment: for each stored-or-listed key "foo_bar",
    // the variable <prefix>FOO_BAR wins if set. Returns keys overridden.
    std::vector<std::string> apply_env(const std::string& prefix,
                                       const std::vector<std::string>& keys);

    std::string get_str(const std::string& key, const std::string& def) const;
    std::string require_str(const std::string& key) const;
    int64_t get_int(const std::string& key, int64_t def) const;
    double get_double(const std::string& key, double def) const;
    bool get_bool(const std::string& key, bool def) const;
    uint64_t get_u64(const std::string& key, uint64_t def) const;
    // Comma-separated integer list, e.g. "100,1000,10000".
    std::vector<int64_t> get_int_list(const std::string& key) const;
    std::vector<std::string> get_str_list(const std::string& key) const;

    // Canonical sorted "k=v\n" dump, used for config echo in output files.
    std::string echo() const;

    const std::map<std::string, std::string>& entries() const { return values_; }

    // Keys present in the config but not in `known` (typo warnings).
    std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace varskip
