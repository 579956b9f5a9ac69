// varskip: command-line front end over the C API (varskip.h).
//
// Every command resolves a flat key=value config with precedence
//   defaults < config=FILE < VARSKIP_<KEY> environment < arguments
// and echoes the resolved config into whatever it writes. All seeds are
// explicit; outputs are byte-reproducible except for wall-clock fields,
// which live in a separate "meta" block.
#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "varskip.h"

namespace {

struct Fail {
    int code;  // 1 usage, 2 runtime
    std::string msg;
};

using Kv = std::map<std::string, std::string>;

[[noreturn]] void usage_fail(const std::string& msg) { throw Fail{1, msg}; }

// Library failures: invalid input counts as usage, IO/internal as runtime.
void check(int rc) {
    if (rc != VS_OK) throw Fail{rc == VS_EINVAL ? 1 : 2, vs_last_error()};
}

std::string take(char* s) {
    std::string out = s ? s : "";
    vs_string_free(s);
    return out;
}

struct TableHandle {
    vs_table* h = nullptr;
    ~TableHandle() { vs_table_free(h); }
};
struct ModelHandle {
    vs_model* h = nullptr;
    ~ModelHandle() { vs_model_free(h); }
};
struct WorkloadHandle {
    vs_workload* h = nullptr;
    ~WorkloadHandle() { vs_workload_free(h); }
};

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!(std::islower(static_cast<unsigned char>(c)) ||
              std::isdigit(static_cast<unsigned char>(c)) || c == '_'))
            return false;
    return true;
}

// Config-file grammar (mirrors the library's): whitespace-separated key=value
// tokens, double quotes protect whitespace in values, '#' at a token boundary
// comments to end of line.
void parse_kv_text(const std::string& text, const std::string& where, Kv& out) {
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
            if (line[i] == '#') break;
            const size_t start = i;
            while (i < line.size() && line[i] != '=' && !space()) ++i;
            if (i == line.size() || line[i] != '=' || i == start) {
                while (i < line.size() && !space()) ++i;
                usage_fail(where + ": malformed token '" + line.substr(start, i - start) +
                           "' (expected key=value)");
            }
            std::string key = line.substr(start, i - start);
            if (!valid_key(key)) usage_fail(where + ": invalid key '" + key + "'");
            ++i;
            std::string value;
            if (i < line.size() && line[i] == '"') {
                const size_t close = line.find('"', ++i);
                if (close == std::string::npos)
                    usage_fail(where + ": unterminated quoted value for key '" + key + "'");
                value = line.substr(i, close - i);
                i = close + 1;
            } else {
                const size_t vstart = i;
                while (i < line.size() && !space()) ++i;
                value = line.substr(vstart, i - vstart);
            }
            out[key] = std::move(value);
        }
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Fail{2, "cannot read '" + path + "'"};
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Fail{2, "cannot write '" + path + "'"};
    out << content;
    if (!out) throw Fail{2, "write failed for '" + path + "'"};
}

std::string upper(const std::string& s) {
    std::string out = s;
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const std::string& p : parts) {
        if (!out.empty()) out += ", ";
        out += p;
    }
    return out;
}

// One resolved value as a config token; quoted when whitespace demands it.
std::string kv_token(const std::string& k, const std::string& v) {
    if (v.find('"') != std::string::npos)
        usage_fail("value for '" + k + "' contains a double quote");
    if (v.find_first_of(" \t#") != std::string::npos) return k + "=\"" + v + "\"";
    return k + "=" + v;
}

std::string flatten(const Kv& kv) {
    std::string out;
    for (const auto& [k, v] : kv) {
        if (!out.empty()) out += ' ';
        out += kv_token(k, v);
    }
    return out;
}

std::string echo_lines(const Kv& kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += kv_token(k, v) + "\n";
    return out;
}

struct Resolved {
    Kv kv;
    std::set<std::string> given;  // keys set by file, env, or argv (not defaults)

    const std::string& require(const std::string& key) const {
        auto it = kv.find(key);
        if (it == kv.end()) usage_fail("missing required key '" + key + "'");
        return it->second;
    }
    std::string get(const std::string& key, const std::string& def = "") const {
        auto it = kv.find(key);
        return it == kv.end() ? def : it->second;
    }
    bool has(const std::string& key) const { return kv.count(key) != 0; }
    void drop(const std::string& key) { kv.erase(key); }
};

int64_t to_i64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        int64_t n = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return n;
    } catch (const std::exception&) {
        usage_fail("key '" + key + "': '" + v + "' is not an integer");
    }
}

int32_t to_i32(const std::string& key, const std::string& v) {
    return static_cast<int32_t>(to_i64(key, v));
}

uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        uint64_t n = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return n;
    } catch (const std::exception&) {
        usage_fail("key '" + key + "': '" + v + "' is not an unsigned integer");
    }
}

int to_flag(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return 1;
    if (v == "0" || v == "false" || v == "no" || v == "off") return 0;
    usage_fail("key '" + key + "': '" + v + "' is not a boolean");
}

// defaults < config file < environment < argv; argv keys are validated
// strictly, config-file keys outside `known` are ignored with a note (one
// file may drive several commands).
Resolved resolve(const std::vector<std::string>& args, const Kv& defaults,
                 const std::vector<std::string>& known) {
    Kv cli;
    for (const std::string& a : args) {
        const size_t eq = a.find('=');
        if (eq == std::string::npos || eq == 0)
            usage_fail("expected key=value, got '" + a + "'");
        const std::string key = a.substr(0, eq);
        if (!valid_key(key)) usage_fail("invalid key '" + key + "'");
        if (key != "config" && std::find(known.begin(), known.end(), key) == known.end())
            usage_fail("unknown key '" + key + "' (known: " + join(known) + ")");
        cli[key] = a.substr(eq + 1);
    }

    Resolved r;
    r.kv = defaults;
    std::string file = cli.count("config") ? cli.at("config") : "";
    if (file.empty())
        if (const char* v = std::getenv("VARSKIP_CONFIG")) file = v;
    if (!file.empty()) {
        Kv from_file;
        std::ifstream probe(file);
        if (!probe) usage_fail("cannot open config file '" + file + "'");
        std::stringstream ss;
        ss << probe.rdbuf();
        parse_kv_text(ss.str(), "config file '" + file + "'", from_file);
        std::vector<std::string> ignored;
        for (const auto& [k, v] : from_file) {
            if (std::find(known.begin(), known.end(), k) == known.end()) {
                ignored.push_back(k);
                continue;
            }
            r.kv[k] = v;
            r.given.insert(k);
        }
        if (!ignored.empty())
            std::fprintf(stderr, "note: config keys not used by this command: %s\n",
                         join(ignored).c_str());
        r.kv["config"] = file;
    }
    for (const std::string& k : known)
        if (const char* v = std::getenv(("VARSKIP_" + upper(k)).c_str())) {
            r.kv[k] = v;
            r.given.insert(k);
        }
    for (const auto& [k, v] : cli) {
        if (k == "config") continue;
        r.kv[k] = v;
        r.given.insert(k);
    }
    return r;
}

void print_table_info(const vs_table* t) {
    char* info = nullptr;
    check(vs_table_info(t, &info));
    std::fputs(take(info).c_str(), stdout);
}

/* ---- commands ----------------------------------------------------------- */

int cmd_synth(const std::vector<std::string>& args) {
    const std::vector<std::string> known = {"kind", "rows",  "cols", "domains", "depth",
                                            "noise", "width", "seed", "name",    "out"};
    const Kv defaults = {{"kind", "table"}, {"depth", "1"}, {"noise", "0.2"}, {"seed", "0"}};
    Resolved r = resolve(args, defaults, known);
    const std::string out = r.require("out");
    const std::string kind = r.get("kind");

    Kv gen;
    TableHandle t;
    if (kind == "table") {
        r.drop("width");
        for (const char* k : {"rows", "cols", "domains"}) gen[k] = r.require(k);
        for (const char* k : {"depth", "noise", "seed", "name"})
            if (r.has(k)) gen[k] = r.get(k);
        check(vs_table_synth(flatten(gen).c_str(), &t.h));
    } else if (kind == "text") {
        r.drop("depth");
        r.drop("noise");
        r.drop("cols");
        r.drop("domains");
        for (const char* k : {"rows", "width"}) gen[k] = r.require(k);
        for (const char* k : {"seed", "name"})
            if (r.has(k)) gen[k] = r.get(k);
        check(vs_table_synth_text(flatten(gen).c_str(), &t.h));
    } else {
        usage_fail("kind must be 'table' or 'text', got '" + kind + "'");
    }
    check(vs_table_save(t.h, out.c_str(), echo_lines(r.kv).c_str()));
    std::printf("wrote %s\n", out.c_str());
    print_table_info(t.h);
    return 0;
}

int cmd_ingest(const std::vector<std::string>& args) {
    const std::vector<std::string> known = {"csv", "columns", "text", "width", "name", "out"};
    Resolved r = resolve(args, {}, known);
    const std::string out = r.require("out");
    if (r.has("csv") == r.has("text")) usage_fail("give exactly one of csv= or text=");

    TableHandle t;
    if (r.has("csv")) {
        const std::string cols = r.get("columns");
        check(vs_table_from_csv(r.get("csv").c_str(), cols.empty() ? nullptr : cols.c_str(),
                                r.has("name") ? r.get("name").c_str() : nullptr, &t.h));
    } else {
        check(vs_table_from_text_file(r.get("text").c_str(),
                                      r.has("name") ? r.get("name").c_str() : nullptr,
                                      to_i32("width", r.require("width")), &t.h));
    }
    check(vs_table_save(t.h, out.c_str(), echo_lines(r.kv).c_str()));
    std::printf("wrote %s\n", out.c_str());
    print_table_info(t.h);
    return 0;
}

void print_epoch(void*, int32_t epoch, double train_bits, double eval_bits) {
    std::printf("epoch %3d  train %.4f  eval %.4f bits/row\n", epoch, train_bits, eval_bits);
    std::fflush(stdout);
}

int cmd_train(const std::vector<std::string>& args, bool text_mode) {
    const std::vector<std::string> model_keys = {
        "epochs", "batch_size", "blocks", "layers_per_block", "hidden",
        "d_emb",  "lr",         "warmup_epochs", "mask_mode",  "mask_p",
        "orders", "seed",       "tied_embeddings"};
    std::vector<std::string> known = model_keys;
    known.push_back("table");
    known.push_back("out");
    Kv defaults;
    if (text_mode) defaults["mask_mode"] = "prefix";
    Resolved r = resolve(args, defaults, known);
    const std::string out = r.require("out");

    TableHandle t;
    check(vs_table_load(r.require("table").c_str(), &t.h));
    Kv model_kv;
    for (const std::string& k : model_keys)
        if (r.has(k)) model_kv[k] = r.get(k);
    ModelHandle m;
    check(vs_model_train(t.h, flatten(model_kv).c_str(), print_epoch, nullptr, &m.h));
    check(vs_model_save(m.h, out.c_str()));
    std::printf("wrote %s\n", out.c_str());
    char* info = nullptr;
    check(vs_model_info(m.h, &info));
    std::fputs(take(info).c_str(), stdout);
    return 0;
}

int cmd_estimate(const std::vector<std::string>& args) {
    const std::vector<std::string> known = {"model", "query",  "pattern", "estimator",
                                            "budget", "seed",  "naive",   "out"};
    const Kv defaults = {
        {"estimator", "skipping"}, {"budget", "1000"}, {"seed", "0"}, {"naive", "0"}};
    Resolved r = resolve(args, defaults, known);
    if (r.has("query") == r.has("pattern")) usage_fail("give exactly one of query= or pattern=");

    ModelHandle m;
    check(vs_model_load(r.require("model").c_str(), &m.h));
    const int64_t budget = to_i64("budget", r.get("budget"));
    const uint64_t seed = to_u64("seed", r.get("seed"));

    char* json = nullptr;
    if (r.has("pattern")) {
        r.drop("estimator");
        check(vs_contains(m.h, r.get("pattern").c_str(), budget, seed,
                          to_flag("naive", r.get("naive")), flatten(r.kv).c_str(), &json));
    } else {
        r.drop("naive");
        check(vs_estimate(m.h, r.get("query").c_str(), r.get("estimator").c_str(), budget,
                          seed, flatten(r.kv).c_str(), &json));
    }
    const std::string doc = take(json);
    if (r.has("out"))
        write_file(r.get("out"), doc);
    else
        std::fputs(doc.c_str(), stdout);
    return 0;
}

int cmd_bench(const std::vector<std::string>& args) {
    const std::vector<std::string> known = {
        "model",     "table",     "workload", "queries",  "k_min",        "k_max",
        "workload_seed", "workload_out", "budgets",  "estimators", "seed", "resamples",
        "workers",   "out"};
    const Kv defaults = {{"k_min", "1"},
                         {"k_max", "4"},
                         {"workload_seed", "0"},
                         {"budgets", "100,1000,10000"},
                         {"estimators", "baseline,skipping,naive"},
                         {"seed", "0"},
                         {"resamples", "1000"},
                         {"workers", "0"}};
    Resolved r = resolve(args, defaults, known);
    const std::string out = r.require("out");
    if (r.given.count("workload") && r.given.count("queries"))
        usage_fail("give workload= or queries=, not both");
    if (!r.has("workload") && !r.has("queries"))
        usage_fail("give workload=FILE or queries=COUNT");

    ModelHandle m;
    check(vs_model_load(r.require("model").c_str(), &m.h));
    TableHandle t;
    check(vs_table_load(r.require("table").c_str(), &t.h));

    WorkloadHandle w;
    if (r.has("workload")) {
        for (const char* k : {"queries", "k_min", "k_max", "workload_seed"}) r.drop(k);
        check(vs_workload_load(r.get("workload").c_str(), t.h, &w.h));
    } else {
        check(vs_workload_generate(t.h, to_i32("queries", r.get("queries")),
                                   to_i32("k_min", r.get("k_min")),
                                   to_i32("k_max", r.get("k_max")),
                                   to_u64("workload_seed", r.get("workload_seed")), &w.h));
        if (r.has("workload_out"))
            check(vs_workload_save(w.h, t.h, r.get("workload_out").c_str()));
    }

    char *json = nullptr, *csv = nullptr, *text = nullptr;
    check(vs_bench(m.h, t.h, w.h, flatten(r.kv).c_str(), &json, &csv, &text));
    write_file(out + ".json", take(json));
    write_file(out + ".csv", take(csv));
    const std::string summary = take(text);
    write_file(out + ".txt", summary);
    std::printf("wrote %s.json %s.csv %s.txt\n\n", out.c_str(), out.c_str(), out.c_str());
    std::fputs(summary.c_str(), stdout);
    return 0;
}

int cmd_text_bench(const std::vector<std::string>& args) {
    const std::vector<std::string> known = {
        "model",      "table",      "patterns_file", "n_patterns", "min_len", "max_len",
        "pattern_seed", "patterns_out", "budget",    "seed",       "resamples", "workers",
        "out"};
    const Kv defaults = {{"n_patterns", "50"}, {"min_len", "3"},      {"max_len", "8"},
                         {"pattern_seed", "0"}, {"budget", "1000"},   {"seed", "0"},
                         {"resamples", "1000"}, {"workers", "0"}};
    Resolved r = resolve(args, defaults, known);
    const std::string out = r.require("out");
    for (const char* k : {"n_patterns", "min_len", "max_len", "pattern_seed"})
        if (r.given.count("patterns_file") && r.given.count(k))
            usage_fail(std::string("'") + k + "' conflicts with patterns_file=");

    ModelHandle m;
    check(vs_model_load(r.require("model").c_str(), &m.h));
    TableHandle t;
    check(vs_table_load(r.require("table").c_str(), &t.h));

    std::string patterns;
    if (r.has("patterns_file")) {
        for (const char* k : {"n_patterns", "min_len", "max_len", "pattern_seed"}) r.drop(k);
        patterns = read_file(r.get("patterns_file"));
    } else {
        char* lines = nullptr;
        check(vs_text_patterns(t.h, to_i32("n_patterns", r.get("n_patterns")),
                               to_i32("min_len", r.get("min_len")),
                               to_i32("max_len", r.get("max_len")),
                               to_u64("pattern_seed", r.get("pattern_seed")), &lines));
        patterns = take(lines);
    }
    if (r.has("patterns_out")) write_file(r.get("patterns_out"), patterns);

    char *json = nullptr, *text = nullptr;
    check(vs_text_bench(m.h, t.h, patterns.c_str(), flatten(r.kv).c_str(), &json, &text));
    write_file(out + ".json", take(json));
    const std::string summary = take(text);
    write_file(out + ".txt", summary);
    std::printf("wrote %s.json %s.txt\n\n", out.c_str(), out.c_str());
    std::fputs(summary.c_str(), stdout);
    return 0;
}

const char* kUsage = R"(varskip - autoregressive range-density estimation

usage: varskip <command> key=value ...

commands:
  synth        kind=table rows= cols= domains=4,8,16 [depth= noise= seed= name=] out=
               kind=text rows= width= [seed= name=] out=
  ingest       csv=FILE [columns=a,b,c] | text=FILE width=N  [name=] out=
  train        table=CACHE out=CKPT [epochs= batch_size= blocks= layers_per_block=
               hidden= d_emb= lr= warmup_epochs= mask_mode= mask_p= orders= seed=
               tied_embeddings=]
  text-train   same keys as train; defaults mask_mode=prefix
  estimate     model=CKPT query="col0 >= 3 AND col2 == x" [estimator= budget= seed=]
               model=CKPT pattern=SUBSTRING [naive=0|1 budget= seed=]  [out=]
  bench        model= table= (workload=FILE | queries=N [k_min= k_max= workload_seed=
               workload_out=]) [budgets= estimators= resamples= workers= seed=] out=PREFIX
  text-bench   model= table= (patterns_file=FILE | [n_patterns= min_len= max_len=
               pattern_seed= patterns_out=]) [budget= resamples= workers= seed=] out=PREFIX

config resolution: defaults < config=FILE (flat key=value) < VARSKIP_<KEY> < arguments
exit codes: 0 success, 1 usage, 2 runtime
)";

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fputs(kUsage, stderr);
        return 1;
    }
    const std::string cmd = argv[1];
    if (cmd == "help" || cmd == "--help" || cmd == "-h") {
        std::fputs(kUsage, stdout);
        return 0;
    }
    const std::vector<std::string> args(argv + 2, argv + argc);
    try {
        if (cmd == "synth") return cmd_synth(args);
        if (cmd == "ingest") return cmd_ingest(args);
        if (cmd == "train") return cmd_train(args, false);
        if (cmd == "text-train") return cmd_train(args, true);
        if (cmd == "estimate") return cmd_estimate(args);
        if (cmd == "bench") return cmd_bench(args);
        if (cmd == "text-bench") return cmd_text_bench(args);
        usage_fail("unknown command '" + cmd + "' (see 'varskip help')");
    } catch (const Fail& f) {
        std::fprintf(stderr, "error: %s\n", f.msg.c_str());
        return f.code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
