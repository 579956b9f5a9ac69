#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "varskip/conditional.hpp"
#include "varskip/kvconfig.hpp"
#include "varskip/made.hpp"
#include "varskip/matrix.hpp"
#include "varskip/rng.hpp"
#include "varskip/table.hpp"

namespace varskip {

// Input code meaning "feed this column's MASK embedding". Codes equal to a
// column's vocab size mean the same thing.
inline constexpr int32_t kMaskCode = -1;

struct ModelConfig {
    int32_t epochs = 20;
    int32_t batch_size = 2048;
    int32_t blocks = 3;
    int32_t layers_per_block = 2;
    int32_t hidden = 64;
    int32_t d_emb = 8;
    double lr = 5e-4;
    double warmup_epochs = 1.0;
    std::string mask_mode = "none";  // none | random | prefix | fixed
    double mask_p = 0.5;             // only for mask_mode == fixed
    int32_t orders = 1;
    uint64_t seed = 0;
    bool tied_embeddings = false;    // text mode: one char table for all positions

    static const std::vector<std::string>& keys();
    static ModelConfig from_kv(const KvConfig& kv);
    std::string echo() const;
    void validate() const;
};

// Trainable affine; connectivity masks live with the model, per ordering.
// `cond` is the order-conditioning weight (same shape and mask as `w`, fed
// an all-one input), present only in multi-order models.
struct MaskedLayer {
    DenseMatrix w;     // in × out
    DenseMatrix b;     // 1 × out
    DenseMatrix cond;  // in × out or empty
};

// out = input·(w⊙mask) + bias [+ 1⃗·(cond⊙mask)]
DenseMatrix masked_affine(const DenseMatrix& input, const DenseMatrix& w, const DenseMatrix& mask,
                          const DenseMatrix& bias, const DenseMatrix* cond = nullptr);

// Training-time input masking: which ordering positions get MASK embeddings.
struct MaskPlan {
    std::vector<int32_t> positions;  // ordering positions, strictly increasing
};

// mode "random": |positions| ~ U{0..n-1}, drawn without replacement.
// mode "prefix": positions 0..len-1 with len ~ U{0..n-1}.
// mode "fixed": each position masked with probability fixed_p independently;
//               if all n got masked, one uniformly chosen position is unmasked.
MaskPlan sample_mask_plan(Rng& rng, int32_t n, const std::string& mode, double fixed_p);

class ArModel : public ConditionalModel {
public:
    ArModel() = default;
    static ArModel init(std::vector<Column> schema, const ModelConfig& cfg);

    int32_t n_cols() const override { return static_cast<int32_t>(schema_.size()); }
    int32_t hidden_width() const { return hidden_; }
    const ModelConfig& config() const { return cfg_; }
    const std::vector<Column>& schema() const override { return schema_; }
    const std::vector<Ordering>& orderings() const override { return orderings_; }
    const MadeMasks& masks(int32_t order) const { return masks_[static_cast<size_t>(order)]; }
    bool mask_trained() const override { return cfg_.mask_mode != "none"; }
    bool prefix_trained() const override { return cfg_.mask_mode == "prefix"; }
    int64_t param_count() const;

    const DenseMatrix& embedding(int32_t col) const;

    // Parameters in a fixed order; gradients from loss_and_grads align.
    std::vector<DenseMatrix*> params();

    // codes/targets: batch × n_cols, flattened row-major. Codes in
    // [0, vocab_c] (vocab_c == MASK) or kMaskCode; targets in [0, vocab_c).
    double loss(std::span<const int32_t> codes, std::span<const int32_t> targets, int64_t batch,
                int32_t order) const;
    double loss_and_grads(std::span<const int32_t> codes, std::span<const int32_t> targets,
                          int64_t batch, int32_t order, std::vector<DenseMatrix>& grads) const;
    std::vector<DenseMatrix> zero_grads() const;

    // Per-column conditional distributions (softmax over the real vocab).
    std::vector<DenseMatrix> forward_dists(std::span<const int32_t> codes, int64_t batch,
                                           int32_t order) const;
    // Distribution at one ordering position (one network evaluation).
    DenseMatrix conditional(std::span<const int32_t> codes, int64_t batch, int32_t position,
                            int32_t order) const override;

    // Embedding lookups with MASK substitution, blocks in natural column
    // order: batch × (n_cols · d_emb).
    DenseMatrix encode_inputs(std::span<const int32_t> codes, int64_t batch) const;

    void save(const std::string& path) const;
    static ArModel load(const std::string& path);

private:
    struct Cache;
    void trunk_forward(const DenseMatrix& x, int32_t order, Cache& cache) const;
    const DenseMatrix& embedding_table(int32_t col) const;
    DenseMatrix& embedding_table_mut(int32_t col);
    int32_t embedding_grad_index(int32_t col) const;

    std::vector<Column> schema_;
    ModelConfig cfg_;
    int32_t hidden_ = 0;  // actual trunk width (shrunk for multi-order parity)
    std::vector<Ordering> orderings_;
    std::vector<MadeMasks> masks_;
    std::vector<DenseMatrix> embeddings_;  // n tables, or 1 when tied
    MaskedLayer input_proj_;
    std::vector<MaskedLayer> trunk_;  // blocks × layers_per_block
    MaskedLayer output_proj_;
};

}  // namespace varskip
