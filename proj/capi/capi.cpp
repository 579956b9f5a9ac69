#include "varskip.h"

#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "varskip/bench.hpp"
#include "varskip/csv.hpp"
#include "varskip/error.hpp"
#include "varskip/estimator.hpp"
#include "varskip/kvconfig.hpp"
#include "varskip/model.hpp"
#include "varskip/query.hpp"
#include "varskip/rng.hpp"
#include "varskip/synth.hpp"
#include "varskip/table.hpp"
#include "varskip/textdata.hpp"
#include "varskip/textmatch.hpp"
#include "varskip/train.hpp"
#include "varskip/workload.hpp"

using namespace varskip;

struct vs_table {
    Table t;
};
struct vs_model {
    ArModel m;
};
struct vs_workload {
    std::vector<RangeQuery> queries;
};

namespace {

constexpr const char* kVersion = "0.1.0";

thread_local std::string t_error;

int set_error(int code, const std::string& msg) {
    t_error = msg;
    return code;
}

// Run `fn`, translating exceptions into status codes + the thread's error
// message. Out-parameters are assigned inside `fn`, so they stay untouched
// on failure.
template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return VS_OK;
    } catch (const Error& e) {
        switch (e.kind()) {
            case ErrorKind::invalid_argument:
                return set_error(VS_EINVAL, e.what());
            case ErrorKind::io:
                return set_error(VS_EIO, e.what());
            case ErrorKind::runtime:
                return set_error(VS_ERUNTIME, e.what());
        }
        return set_error(VS_ERUNTIME, e.what());
    } catch (const std::exception& e) {
        return set_error(VS_ERUNTIME, e.what());
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) fail_runtime("out of memory");
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require(bool ok, const char* what) {
    if (!ok) fail_invalid(std::string("null ") + what);
}

KvConfig parse_kv(const char* kv) {
    KvConfig cfg;
    if (kv && *kv) cfg.parse(kv);
    return cfg;
}

nlohmann::ordered_json kv_object(const KvConfig& kv) {
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (const auto& [k, v] : kv.entries()) out[k] = v;
    return out;
}

// "# key=value" provenance header for the flat-text report formats.
std::string kv_comment_block(const KvConfig& kv) {
    std::string out;
    std::istringstream lines(kv.echo());
    std::string line;
    while (std::getline(lines, line)) out += "# " + line + "\n";
    return out;
}

std::vector<std::string> split_lines(const char* text) {
    std::vector<std::string> out;
    std::string line;
    for (const char* p = text; *p; ++p) {
        if (*p == '\n') {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) out.push_back(std::move(line));
            line.clear();
        } else {
            line += *p;
        }
    }
    if (!line.empty()) out.push_back(std::move(line));
    return out;
}

Table renamed(Table t, const std::string& name) {
    if (name.empty() || name == t.name()) return t;
    return Table(name, t.columns(), t.cells());
}

void check_pair(const ArModel& m, const Table& t) {
    if (m.n_cols() != t.n_cols()) fail_invalid("model does not match the table");
    for (int32_t c = 0; c < t.n_cols(); ++c)
        if (m.schema()[static_cast<size_t>(c)].vocab.values() != t.column(c).vocab.values())
            fail_invalid("model does not match the table (column '" + t.column(c).name + "')");
}

}  // namespace

extern "C" {

const char* vs_version(void) { return kVersion; }

const char* vs_last_error(void) { return t_error.c_str(); }

void vs_string_free(char* s) { std::free(s); }

/* ---- tables ----------------------------------------------------------- */

int vs_table_synth(const char* kv, vs_table** out) {
    return guarded([&] {
        require(out, "output handle");
        KvConfig cfg = parse_kv(kv);
        SynthSpec spec;
        spec.n_rows = cfg.get_int("rows", 0);
        spec.n_cols = static_cast<int32_t>(cfg.get_int("cols", 0));
        std::vector<int64_t> domains = cfg.get_int_list("domains");
        if (domains.size() == 1)
            domains.assign(static_cast<size_t>(spec.n_cols), domains[0]);
        for (int64_t d : domains) spec.domains.push_back(static_cast<int32_t>(d));
        spec.depth = static_cast<int32_t>(cfg.get_int("depth", 1));
        spec.noise = cfg.get_double("noise", 0.2);
        spec.seed = cfg.get_u64("seed", 0);
        Table t = renamed(synth_table(spec), cfg.get_str("name", ""));
        *out = new vs_table{std::move(t)};
    });
}

int vs_table_synth_text(const char* kv, vs_table** out) {
    return guarded([&] {
        require(out, "output handle");
        KvConfig cfg = parse_kv(kv);
        const int64_t rows = cfg.get_int("rows", 0);
        const auto width = static_cast<int32_t>(cfg.get_int("width", 100));
        const uint64_t seed = cfg.get_u64("seed", 0);
        std::vector<std::string> corpus = synth_text_corpus(rows, width, seed);
        *out = new vs_table{make_text_table(cfg.get_str("name", "text"), corpus, width)};
    });
}

int vs_table_from_csv(const char* path, const char* columns, const char* name, vs_table** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "output handle");
        std::vector<std::string> cols;
        if (columns && *columns) {
            KvConfig tmp;
            tmp.set("columns", columns);
            cols = tmp.get_str_list("columns");
        }
        *out = new vs_table{ingest_csv(path, cols, name ? name : "")};
    });
}

int vs_table_from_text_file(const char* path, const char* name, int32_t width, vs_table** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "output handle");
        std::vector<std::string> lines = read_lines(path);
        *out = new vs_table{make_text_table(name && *name ? name : "text", lines, width)};
    });
}

int vs_table_load(const char* path, vs_table** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "output handle");
        *out = new vs_table{Table::load(path)};
    });
}

int vs_table_save(const vs_table* t, const char* path, const char* meta) {
    return guarded([&] {
        require(t, "table");
        require(path, "path");
        t->t.save(path, meta ? meta : "");
    });
}

int vs_table_info(const vs_table* t, char** json_out) {
    return guarded([&] {
        require(t, "table");
        require(json_out, "output string");
        nlohmann::ordered_json info;
        info["name"] = t->t.name();
        info["rows"] = t->t.n_rows();
        info["cols"] = t->t.n_cols();
        info["columns"] = nlohmann::ordered_json::array();
        for (const Column& col : t->t.columns())
            info["columns"].push_back({{"name", col.name}, {"vocab_size", col.vocab.size()}});
        *json_out = dup_string(info.dump(2) + "\n");
    });
}

void vs_table_free(vs_table* t) { delete t; }

/* ---- models ----------------------------------------------------------- */

int vs_model_train(const vs_table* t, const char* kv, vs_epoch_fn cb, void* user,
                   vs_model** out) {
    return guarded([&] {
        require(t, "table");
        require(out, "output handle");
        ModelConfig cfg = ModelConfig::from_kv(parse_kv(kv));
        ArModel model = ArModel::init(t->t.columns(), cfg);
        Rng rng(cfg.seed);
        EpochCallback callback;
        if (cb)
            callback = [cb, user](const EpochLog& log) {
                cb(user, log.epoch, log.train_nll_bits, log.eval_nll_bits);
            };
        train(model, t->t, rng, callback);
        *out = new vs_model{std::move(model)};
    });
}

int vs_model_save(const vs_model* m, const char* path) {
    return guarded([&] {
        require(m, "model");
        require(path, "path");
        m->m.save(path);
    });
}

int vs_model_load(const char* path, vs_model** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "output handle");
        *out = new vs_model{ArModel::load(path)};
    });
}

int vs_model_info(const vs_model* m, char** json_out) {
    return guarded([&] {
        require(m, "model");
        require(json_out, "output string");
        nlohmann::ordered_json info;
        info["cols"] = m->m.n_cols();
        info["params"] = m->m.param_count();
        info["orders"] = static_cast<int64_t>(m->m.orderings().size());
        info["mask_mode"] = m->m.config().mask_mode;
        info["hidden"] = m->m.hidden_width();
        KvConfig echo;
        echo.parse(m->m.config().echo());
        info["config"] = kv_object(echo);
        *json_out = dup_string(info.dump(2) + "\n");
    });
}

void vs_model_free(vs_model* m) { delete m; }

int vs_model_eval_nll(const vs_model* m, const vs_table* t, double* bits_out) {
    return guarded([&] {
        require(m, "model");
        require(t, "table");
        require(bits_out, "output value");
        check_pair(m->m, t->t);
        *bits_out = eval_nll_bits(m->m, t->t);
    });
}

/* ---- range estimation -------------------------------------------------- */

int vs_estimate(const vs_model* m, const char* query, const char* estimator, int64_t budget,
                uint64_t seed, const char* config_kv, char** json_out) {
    return guarded([&] {
        require(m, "model");
        require(query, "query");
        require(estimator, "estimator name");
        require(json_out, "output string");
        const RangeQuery q = parse_query(query, m->m.schema());
        const std::string est_name = estimator;
        Rng rng(seed);
        Estimate est;
        if (est_name == "baseline")
            est = progressive_sample(m->m, q, budget, rng, false);
        else if (est_name == "skipping")
            est = progressive_sample(m->m, q, budget, rng, true);
        else if (est_name == "multiorder")
            est = ensemble_estimate(m->m, q, budget, rng, false);
        else if (est_name == "multiorder+skipping")
            est = ensemble_estimate(m->m, q, budget, rng, true);
        else if (est_name == "naive")
            est = naive_sample(m->m, q, budget, rng);
        else
            fail_invalid("unknown estimator '" + est_name +
                         "' (want baseline|skipping|multiorder|multiorder+skipping|naive)");
        nlohmann::ordered_json doc;
        doc["selectivity"] = est.selectivity;
        doc["budget"] = est.budget;
        doc["forward_passes"] = est.forward_passes;
        doc["std_error"] = est.std_error;
        if (config_kv) doc["config"] = kv_object(parse_kv(config_kv));
        *json_out = dup_string(doc.dump(2) + "\n");
    });
}

int vs_contains(const vs_model* m, const char* pattern, int64_t budget, uint64_t seed,
                int naive, const char* config_kv, char** json_out) {
    return guarded([&] {
        require(m, "model");
        require(pattern, "pattern");
        require(json_out, "output string");
        const Pattern pat = parse_pattern(pattern, m->m.schema()[0].vocab);
        Rng rng(seed);
        const MatchEstimate est = naive ? naive_contains(m->m, pat, budget, rng)
                                        : contains_prob(m->m, pat, budget, rng);
        nlohmann::ordered_json doc;
        doc["pattern"] = pattern;
        doc["probability"] = est.probability;
        doc["per_position_first_terms"] = est.first_terms;
        doc["budget"] = budget;
        doc["second_term_budget"] = est.second_term_budget;
        doc["forward_passes"] = est.forward_passes;
        doc["std_error"] = est.std_error;
        if (config_kv) doc["config"] = kv_object(parse_kv(config_kv));
        *json_out = dup_string(doc.dump(2) + "\n");
    });
}

/* ---- workloads ---------------------------------------------------------- */

int vs_workload_generate(const vs_table* t, int32_t count, int32_t k_min, int32_t k_max,
                         uint64_t seed, vs_workload** out) {
    return guarded([&] {
        require(t, "table");
        require(out, "output handle");
        WorkloadSpec spec;
        spec.count = count;
        spec.k_min = k_min;
        spec.k_max = k_max;
        Rng rng(seed);
        *out = new vs_workload{gen_workload(t->t, spec, rng)};
    });
}

int vs_workload_load(const char* path, const vs_table* t, vs_workload** out) {
    return guarded([&] {
        require(path, "path");
        require(t, "table");
        require(out, "output handle");
        *out = new vs_workload{load_workload(path, t->t)};
    });
}

int vs_workload_save(const vs_workload* w, const vs_table* t, const char* path) {
    return guarded([&] {
        require(w, "workload");
        require(t, "table");
        require(path, "path");
        save_workload(path, t->t, w->queries);
    });
}

int64_t vs_workload_size(const vs_workload* w) {
    return w ? static_cast<int64_t>(w->queries.size()) : -1;
}

void vs_workload_free(vs_workload* w) { delete w; }

/* ---- benchmarks --------------------------------------------------------- */

int vs_bench(const vs_model* m, const vs_table* t, const vs_workload* w, const char* kv,
             char** json_out, char** csv_out, char** text_out) {
    return guarded([&] {
        require(m, "model");
        require(t, "table");
        require(w, "workload");
        KvConfig cfg = parse_kv(kv);
        BenchSpec spec;
        if (cfg.has("budgets")) {
            spec.budgets.clear();
            for (int64_t b : cfg.get_int_list("budgets")) spec.budgets.push_back(b);
        }
        if (cfg.has("estimators")) spec.estimators = cfg.get_str_list("estimators");
        spec.seed = cfg.get_u64("seed", 0);
        spec.resamples = static_cast<int32_t>(cfg.get_int("resamples", 1000));
        spec.workers = static_cast<int32_t>(cfg.get_int("workers", 0));

        const BenchReport report = run_bench(m->m, t->t, w->queries, spec);
        if (json_out) {
            nlohmann::ordered_json full = nlohmann::ordered_json::parse(bench_json(report));
            nlohmann::ordered_json doc;
            doc["config"] = kv_object(cfg);
            doc["data"] = std::move(full["data"]);
            doc["meta"] = std::move(full["meta"]);
            *json_out = dup_string(doc.dump(2) + "\n");
        }
        if (csv_out) *csv_out = dup_string(kv_comment_block(cfg) + bench_csv(report));
        if (text_out) *text_out = dup_string(kv_comment_block(cfg) + bench_text(report));
    });
}

int vs_text_patterns(const vs_table* t, int32_t count, int32_t min_len, int32_t max_len,
                     uint64_t seed, char** lines_out) {
    return guarded([&] {
        require(t, "table");
        require(lines_out, "output string");
        Rng rng(seed);
        std::vector<std::string> patterns =
            sample_patterns(text_table_strings(t->t), count, min_len, max_len, rng);
        std::string joined;
        for (const std::string& p : patterns) joined += p + "\n";
        *lines_out = dup_string(joined);
    });
}

int vs_text_bench(const vs_model* m, const vs_table* t, const char* patterns, const char* kv,
                  char** json_out, char** text_out) {
    return guarded([&] {
        require(m, "model");
        require(t, "table");
        require(patterns, "patterns");
        KvConfig cfg = parse_kv(kv);
        TextBenchSpec spec;
        spec.budget = cfg.get_int("budget", 1000);
        spec.seed = cfg.get_u64("seed", 0);
        spec.resamples = static_cast<int32_t>(cfg.get_int("resamples", 1000));
        spec.workers = static_cast<int32_t>(cfg.get_int("workers", 0));

        const TextBenchReport report =
            run_text_bench(m->m, t->t, split_lines(patterns), spec);
        if (json_out) {
            nlohmann::ordered_json full = nlohmann::ordered_json::parse(text_bench_json(report));
            nlohmann::ordered_json doc;
            doc["config"] = kv_object(cfg);
            doc["data"] = std::move(full["data"]);
            doc["meta"] = std::move(full["meta"]);
            *json_out = dup_string(doc.dump(2) + "\n");
        }
        if (text_out) *text_out = dup_string(kv_comment_block(cfg) + text_bench_text(report));
    });
}

}  // extern "C"
