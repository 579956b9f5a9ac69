#include "varskip/kvconfig.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "varskip/error.hpp"

namespace varskip {

namespace {

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!(std::islower(static_cast<unsigned char>(c)) ||
              std::isdigit(static_cast<unsigned char>(c)) || c == '_'))
            return false;
    return true;
}

}  // namespace

void KvConfig::parse(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        size_t i = 0;
        auto space = [&] { return std::isspace(static_cast<unsigned char>(line[i])) != 0; };
        while (i < line.size()) {
            if (space()) {
                ++i;
                continue;
            }
            if (line[i] == '#') break;  // comment to end of line
            const size_t start = i;
            while (i < line.size() && line[i] != '=' && !space()) ++i;
            if (i == line.size() || line[i] != '=' || i == start) {
                while (i < line.size() && !space()) ++i;
                fail_invalid("malformed config token '" + line.substr(start, i - start) +
                             "' (expected key=value)");
            }
            std::string key = line.substr(start, i - start);
            if (!valid_key(key)) fail_invalid("invalid config key '" + key + "'");
            ++i;
            std::string value;
            if (i < line.size() && line[i] == '"') {
                const size_t close = line.find('"', ++i);
                if (close == std::string::npos)
                    fail_invalid("unterminated quoted value for key '" + key + "'");
                value = line.substr(i, close - i);
                i = close + 1;
            } else {
                const size_t vstart = i;
                while (i < line.size() && !space()) ++i;
                value = line.substr(vstart, i - vstart);
            }
            values_[key] = std::move(value);
        }
    }
}

void KvConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail_io("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    parse(ss.str());
}

std::vector<std::string> KvConfig::apply_env(const std::string& prefix,
                                             const std::vector<std::string>& keys) {
    std::vector<std::string> hit;
    for (const auto& key : keys) {
        std::string var = prefix;
        for (char c : key) var += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (const char* v = std::getenv(var.c_str())) {
            values_[key] = v;
            hit.push_back(key);
        }
    }
    return hit;
}

std::string KvConfig::get_str(const std::string& key, const std::string& def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
}

std::string KvConfig::require_str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) fail_invalid("missing required config key '" + key + "'");
    return it->second;
}

int64_t KvConfig::get_int(const std::string& key, int64_t def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    try {
        size_t pos = 0;
        int64_t v = std::stoll(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        fail_invalid("config key '" + key + "': '" + it->second + "' is not an integer");
    }
}

uint64_t KvConfig::get_u64(const std::string& key, uint64_t def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    try {
        size_t pos = 0;
        uint64_t v = std::stoull(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        fail_invalid("config key '" + key + "': '" + it->second + "' is not an unsigned integer");
    }
}

double KvConfig::get_double(const std::string& key, double def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    try {
        size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        fail_invalid("config key '" + key + "': '" + it->second + "' is not a number");
    }
}

bool KvConfig::get_bool(const std::string& key, bool def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    const std::string& v = it->second;
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    fail_invalid("config key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<int64_t> KvConfig::get_int_list(const std::string& key) const {
    std::vector<int64_t> out;
    auto it = values_.find(key);
    if (it == values_.end()) return out;
    std::istringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        try {
            out.push_back(std::stoll(tok));
        } catch (const std::exception&) {
            fail_invalid("config key '" + key + "': '" + tok + "' is not an integer");
        }
    }
    return out;
}

std::vector<std::string> KvConfig::get_str_list(const std::string& key) const {
    std::vector<std::string> out;
    auto it = values_.find(key);
    if (it == values_.end()) return out;
    std::istringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(tok);
    return out;
}

std::string KvConfig::echo() const {
    std::string out;
    for (const auto& [k, v] : values_) {
        out += k;
        out += '=';
        if (v.find_first_of(" \t\"#") != std::string::npos) {
            if (v.find('"') != std::string::npos)
                fail_invalid("config key '" + k + "': value contains a double quote");
            out += '"' + v + '"';
        } else {
            out += v;
        }
        out += '\n';
    }
    return out;
}

std::vector<std::string> KvConfig::unknown_keys(const std::vector<std::string>& known) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) {
        bool found = false;
        for (const auto& kk : known)
            if (kk == k) {
                found = true;
                break;
            }
        if (!found) out.push_back(k);
    }
    return out;
}

}  // namespace varskip
