/* C interface to the range-density estimation engine.
 *
 * Conventions:
 *   - Functions returning int give VS_OK on success or an error code; the
 *     message for the calling thread's last failure is vs_last_error().
 *   - Out-parameters are written only on VS_OK.
 *   - char** outputs are NUL-terminated, heap-allocated; release them with
 *     vs_string_free(). Handles are released with their _free() function;
 *     freeing NULL is a no-op.
 *   - Configuration strings are flat "key=value" pairs separated by
 *     whitespace or newlines, '#' comments allowed.
 */
#ifndef VARSKIP_H
#define VARSKIP_H

#include <stdint.h>

#if defined(_WIN32)
#define VS_API __declspec(dllexport)
#else
#define VS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define VS_OK 0       /* success */
#define VS_EINVAL 1   /* bad arguments, config, query, or pattern */
#define VS_EIO 2      /* missing, truncated, or unwritable file */
#define VS_ERUNTIME 3 /* divergence, stalled generation, internal failure */

typedef struct vs_table vs_table;
typedef struct vs_model vs_model;
typedef struct vs_workload vs_workload;

/* Library version, static storage. */
VS_API const char* vs_version(void);

/* Message of this thread's most recent failure; valid until the thread's
 * next failing call. Empty string when nothing failed yet. */
VS_API const char* vs_last_error(void);

VS_API void vs_string_free(char* s);

/* ---- tables ----------------------------------------------------------- */

/* Correlated synthetic table. Keys: rows, cols, domains (single size or
 * per-column comma list), depth, noise, seed. */
VS_API int vs_table_synth(const char* kv, vs_table** out);

/* Synthetic text corpus as a fixed-width table. Keys: rows, width, seed. */
VS_API int vs_table_synth_text(const char* kv, vs_table** out);

/* Headered CSV; columns is a comma list ("" or NULL ingests all). */
VS_API int vs_table_from_csv(const char* path, const char* columns, const char* name,
                             vs_table** out);

/* One string per line, truncated/padded to width. */
VS_API int vs_table_from_text_file(const char* path, const char* name, int32_t width,
                                   vs_table** out);

VS_API int vs_table_load(const char* path, vs_table** out);
/* meta is a free-form provenance note stored in the cache (NULL for none). */
VS_API int vs_table_save(const vs_table* t, const char* path, const char* meta);
/* JSON: {name, rows, cols, columns: [{name, vocab_size}]}. */
VS_API int vs_table_info(const vs_table* t, char** json_out);
VS_API void vs_table_free(vs_table* t);

/* ---- models ----------------------------------------------------------- */

/* Per-epoch progress hook. */
typedef void (*vs_epoch_fn)(void* user, int32_t epoch, double train_bits, double eval_bits);

/* Train a model on a table. Keys: epochs, batch_size, blocks,
 * layers_per_block, hidden, d_emb, lr, warmup_epochs, mask_mode, mask_p,
 * orders, seed, tied_embeddings. cb may be NULL. */
VS_API int vs_model_train(const vs_table* t, const char* kv, vs_epoch_fn cb, void* user,
                          vs_model** out);

VS_API int vs_model_save(const vs_model* m, const char* path);
VS_API int vs_model_load(const char* path, vs_model** out);
/* JSON: {cols, params, orders, mask_mode, config: {…}}. */
VS_API int vs_model_info(const vs_model* m, char** json_out);
VS_API void vs_model_free(vs_model* m);

/* Full-table negative log-likelihood in bits per row. */
VS_API int vs_model_eval_nll(const vs_model* m, const vs_table* t, double* bits_out);

/* ---- range estimation -------------------------------------------------- */

/* Query text: conjunctions "name op literal" joined by AND, ops ==, <=, >=,
 * <, >. estimator: baseline | skipping | multiorder | multiorder+skipping |
 * naive. JSON: {selectivity, budget, forward_passes, std_error} plus a
 * config echo object when config_kv is non-NULL. */
VS_API int vs_estimate(const vs_model* m, const char* query, const char* estimator,
                       int64_t budget, uint64_t seed, const char* config_kv, char** json_out);

/* CONTAINS match probability for a raw pattern string. naive != 0 uses the
 * unconditional-sampling baseline. JSON: {pattern, probability,
 * per_position_first_terms, budget, forward_passes, std_error} plus the
 * config echo. */
VS_API int vs_contains(const vs_model* m, const char* pattern, int64_t budget, uint64_t seed,
                       int naive, const char* config_kv, char** json_out);

/* ---- workloads ---------------------------------------------------------- */

/* Random row-anchored conjunctive queries; every query matches ≥ 1 row. */
VS_API int vs_workload_generate(const vs_table* t, int32_t count, int32_t k_min, int32_t k_max,
                                uint64_t seed, vs_workload** out);
VS_API int vs_workload_load(const char* path, const vs_table* t, vs_workload** out);
VS_API int vs_workload_save(const vs_workload* w, const vs_table* t, const char* path);
/* Query count, or -1 on NULL. */
VS_API int64_t vs_workload_size(const vs_workload* w);
VS_API void vs_workload_free(vs_workload* w);

/* ---- benchmarks --------------------------------------------------------- */

/* Range-query benchmark. Keys: budgets (comma list), estimators (comma
 * list), seed, resamples, workers. The full kv is echoed into the JSON
 * under "config"; unknown keys are otherwise ignored. Any of the three
 * outputs may be NULL when not wanted. */
VS_API int vs_bench(const vs_model* m, const vs_table* t, const vs_workload* w, const char* kv,
                    char** json_out, char** csv_out, char** text_out);

/* Sample distinct substrings of the table's strings, newline-joined. */
VS_API int vs_text_patterns(const vs_table* t, int32_t count, int32_t min_len, int32_t max_len,
                            uint64_t seed, char** lines_out);

/* CONTAINS benchmark over newline-separated patterns. Keys: budget, seed,
 * resamples, workers; same config-echo rule as vs_bench. */
VS_API int vs_text_bench(const vs_model* m, const vs_table* t, const char* patterns,
                         const char* kv, char** json_out, char** text_out);

#ifdef __cplusplus
}
#endif

#endif /* VARSKIP_H */
