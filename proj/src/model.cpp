#include "varskip/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <numeric>

#include "varskip/binio.hpp"
#include "varskip/error.hpp"

namespace varskip {

// ---------------------------------------------------------------- config --

const std::vector<std::string>& ModelConfig::keys() {
    static const std::vector<std::string> k{"epochs",  "batch_size",    "blocks",
                                            "layers_per_block", "hidden", "d_emb",
                                            "lr",      "warmup_epochs", "mask_mode",
                                            "mask_p",  "orders",        "seed",
                                            "tied_embeddings"};
    return k;
}

ModelConfig ModelConfig::from_kv(const KvConfig& kv) {
    ModelConfig c;
    c.epochs = static_cast<int32_t>(kv.get_int("epochs", c.epochs));
    c.batch_size = static_cast<int32_t>(kv.get_int("batch_size", c.batch_size));
    c.blocks = static_cast<int32_t>(kv.get_int("blocks", c.blocks));
    c.layers_per_block = static_cast<int32_t>(kv.get_int("layers_per_block", c.layers_per_block));
    c.hidden = static_cast<int32_t>(kv.get_int("hidden", c.hidden));
    c.d_emb = static_cast<int32_t>(kv.get_int("d_emb", c.d_emb));
    c.lr = kv.get_double("lr", c.lr);
    c.warmup_epochs = kv.get_double("warmup_epochs", c.warmup_epochs);
    c.mask_mode = kv.get_str("mask_mode", c.mask_mode);
    c.mask_p = kv.get_double("mask_p", c.mask_p);
    c.orders = static_cast<int32_t>(kv.get_int("orders", c.orders));
    c.seed = kv.get_u64("seed", c.seed);
    c.tied_embeddings = kv.get_bool("tied_embeddings", c.tied_embeddings);
    c.validate();
    return c;
}

std::string ModelConfig::echo() const {
    char num[64];
    KvConfig kv;
    kv.set("epochs", std::to_string(epochs));
    kv.set("batch_size", std::to_string(batch_size));
    kv.set("blocks", std::to_string(blocks));
    kv.set("layers_per_block", std::to_string(layers_per_block));
    kv.set("hidden", std::to_string(hidden));
    kv.set("d_emb", std::to_string(d_emb));
    std::snprintf(num, sizeof num, "%.17g", lr);
    kv.set("lr", num);
    std::snprintf(num, sizeof num, "%.17g", warmup_epochs);
    kv.set("warmup_epochs", num);
    kv.set("mask_mode", mask_mode);
    std::snprintf(num, sizeof num, "%.17g", mask_p);
    kv.set("mask_p", num);
    kv.set("orders", std::to_string(orders));
    kv.set("seed", std::to_string(seed));
    kv.set("tied_embeddings", tied_embeddings ? "true" : "false");
    return kv.echo();
}

void ModelConfig::validate() const {
    if (epochs < 0) fail_invalid("epochs must be ≥ 0");
    if (batch_size < 1) fail_invalid("batch_size must be ≥ 1");
    if (blocks < 0) fail_invalid("blocks must be ≥ 0");
    if (layers_per_block < 1) fail_invalid("layers_per_block must be ≥ 1");
    if (hidden < 1) fail_invalid("hidden must be ≥ 1");
    if (d_emb < 1) fail_invalid("d_emb must be ≥ 1");
    if (!(lr > 0.0)) fail_invalid("lr must be > 0");
    if (warmup_epochs < 0.0) fail_invalid("warmup_epochs must be ≥ 0");
    if (mask_mode != "none" && mask_mode != "random" && mask_mode != "prefix" &&
        mask_mode != "fixed")
        fail_invalid("mask_mode must be none|random|prefix|fixed, got '" + mask_mode + "'");
    if (mask_mode == "fixed" && (mask_p <= 0.0 || mask_p >= 1.0))
        fail_invalid("mask_p must be in (0, 1)");
    if (orders < 1) fail_invalid("orders must be ≥ 1");
}

// ------------------------------------------------------------ primitives --

DenseMatrix masked_affine(const DenseMatrix& input, const DenseMatrix& w, const DenseMatrix& mask,
                          const DenseMatrix& bias, const DenseMatrix* cond) {
    if (!w.same_shape(mask)) fail_invalid("masked_affine: weight/mask shape mismatch");
    if (bias.rows != 1 || bias.cols != w.cols) fail_invalid("masked_affine: bad bias shape");
    DenseMatrix weff;
    hadamard(w, mask, weff);
    DenseMatrix out;
    matmul(input, weff, out);
    std::vector<double> rowadd(bias.data);
    if (cond) {
        if (!cond->same_shape(w)) fail_invalid("masked_affine: cond/weight shape mismatch");
        DenseMatrix ceff;
        hadamard(*cond, mask, ceff);
        auto cs = col_sums(ceff);
        for (size_t j = 0; j < rowadd.size(); ++j) rowadd[j] += cs[j];
    }
    add_row_vector(out, rowadd);
    return out;
}

MaskPlan sample_mask_plan(Rng& rng, int32_t n, const std::string& mode, double fixed_p) {
    if (n < 1) fail_invalid("sample_mask_plan: n must be ≥ 1");
    MaskPlan plan;
    if (mode == "random") {
        int32_t k = rng.uniform_int(n);  // n_mask ~ U{0..n-1}
        std::vector<int32_t> idx(static_cast<size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        for (int32_t i = 0; i < k; ++i) {
            int32_t j = i + rng.uniform_int(n - i);
            std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
        }
        plan.positions.assign(idx.begin(), idx.begin() + k);
        std::sort(plan.positions.begin(), plan.positions.end());
    } else if (mode == "prefix") {
        int32_t len = rng.uniform_int(n);
        plan.positions.resize(static_cast<size_t>(len));
        std::iota(plan.positions.begin(), plan.positions.end(), 0);
    } else if (mode == "fixed") {
        for (int32_t i = 0; i < n; ++i)
            if (rng.uniform_real() < fixed_p) plan.positions.push_back(i);
        if (static_cast<int32_t>(plan.positions.size()) == n)
            plan.positions.erase(plan.positions.begin() + rng.uniform_int(n));
    } else {
        fail_invalid("unknown mask mode '" + mode + "'");
    }
    return plan;
}

// ----------------------------------------------------------------- model --

namespace {

constexpr char kModelMagic[4] = {'V', 'S', 'K', 'M'};
constexpr uint32_t kModelVersion = 1;

int64_t layer_param_count(int64_t in, int64_t out, bool cond) {
    return in * out + out + (cond ? in * out : 0);
}

int64_t param_count_for(const std::vector<Column>& schema, const ModelConfig& cfg, int32_t hidden,
                        bool cond) {
    int64_t n = static_cast<int64_t>(schema.size());
    int64_t nd = n * cfg.d_emb;
    int64_t total = 0;
    int64_t n_tables = cfg.tied_embeddings ? 1 : n;
    for (int64_t t = 0; t < n_tables; ++t)
        total += (static_cast<int64_t>(schema[static_cast<size_t>(t)].vocab.size()) + 1) * cfg.d_emb;
    total += layer_param_count(nd, hidden, cond);
    total += static_cast<int64_t>(cfg.blocks) * cfg.layers_per_block *
             layer_param_count(hidden, hidden, cond);
    total += layer_param_count(hidden, nd, cond);
    return total;
}

void copy_col_block(const DenseMatrix& src, int64_t col0, int64_t width, DenseMatrix& dst) {
    if (dst.rows != src.rows || dst.cols != width) dst = DenseMatrix(src.rows, width);
    for (int64_t r = 0; r < src.rows; ++r)
        std::memcpy(dst.row(r), src.row(r) + col0, static_cast<size_t>(width) * sizeof(double));
}

void add_col_block(DenseMatrix& dst, int64_t col0, int64_t width, const DenseMatrix& src) {
    for (int64_t r = 0; r < src.rows; ++r) {
        double* d = dst.row(r) + col0;
        const double* s = src.row(r);
        for (int64_t j = 0; j < width; ++j) d[j] += s[j];
    }
}

void add_inplace(DenseMatrix& a, const DenseMatrix& b) {
    for (size_t i = 0; i < a.size(); ++i) a.data[i] += b.data[i];
}

// Accumulating backward through one masked affine. `din` may be null for the
// innermost layer.
void backward_affine(const DenseMatrix& in, const DenseMatrix& dout, const MaskedLayer& layer,
                     const DenseMatrix& mask, DenseMatrix& gw, DenseMatrix& gb, DenseMatrix* gcond,
                     DenseMatrix* din) {
    DenseMatrix tmp;
    matmul_tn(in, dout, tmp);
    for (size_t i = 0; i < gw.size(); ++i) gw.data[i] += tmp.data[i] * mask.data[i];
    auto cs = col_sums(dout);
    for (int64_t j = 0; j < gb.cols; ++j) gb.at(0, j) += cs[static_cast<size_t>(j)];
    if (gcond)
        for (int64_t i = 0; i < mask.rows; ++i)
            for (int64_t j = 0; j < mask.cols; ++j)
                gcond->at(i, j) += mask.at(i, j) * cs[static_cast<size_t>(j)];
    if (din) {
        DenseMatrix weff;
        hadamard(layer.w, mask, weff);
        matmul_nt(dout, weff, *din);
    }
}

const DenseMatrix* cond_ptr(const MaskedLayer& l) { return l.cond.empty() ? nullptr : &l.cond; }

}  // namespace

struct ArModel::Cache {
    DenseMatrix x;
    std::vector<DenseMatrix> a;  // residual stream: blocks+1 entries
    std::vector<DenseMatrix> r;  // relu outputs feeding each trunk affine
    std::vector<DenseMatrix> s;  // trunk affine outputs
    DenseMatrix hf;              // relu(a.back())
};

ArModel ArModel::init(std::vector<Column> schema, const ModelConfig& cfg) {
    cfg.validate();
    if (schema.empty()) fail_invalid("model needs at least one column");
    ArModel m;
    m.schema_ = std::move(schema);
    m.cfg_ = cfg;
    const int32_t n = m.n_cols();

    if (cfg.tied_embeddings)
        for (int32_t c = 1; c < n; ++c)
            if (m.schema_[static_cast<size_t>(c)].vocab.values() != m.schema_[0].vocab.values())
                fail_invalid("tied embeddings require identical vocabs in every column");

    m.orderings_.push_back(identity_ordering(n));
    for (int32_t i = 1; i < cfg.orders; ++i) {
        Rng r(Rng::derive_seed(cfg.seed, 0x6f726400ULL + static_cast<uint64_t>(i)));
        m.orderings_.push_back(random_ordering(n, r));
    }

    m.hidden_ = cfg.hidden;
    if (cfg.orders > 1) {
        // Order conditioning doubles every affine's weight count; shrink the
        // trunk until total parameters match the single-order model.
        int64_t target = param_count_for(m.schema_, cfg, cfg.hidden, false);
        int32_t best = -1;
        int64_t best_gap = INT64_MAX;
        for (int32_t h = std::max(1, n - 1); h <= cfg.hidden; ++h) {
            int64_t gap = std::llabs(param_count_for(m.schema_, cfg, h, true) - target);
            if (gap < best_gap) {
                best_gap = gap;
                best = h;
            }
        }
        if (best < 0 || best_gap * 10 > target)
            fail_runtime("multi-order trunk cannot match the single-order parameter count "
                         "within 10%; raise hidden");
        m.hidden_ = best;
    }
    if (n > 1 && m.hidden_ < n - 1)
        fail_invalid("hidden width " + std::to_string(m.hidden_) + " too small for " +
                     std::to_string(n) + " columns");

    for (const Ordering& o : m.orderings_)
        m.masks_.push_back(build_made_masks(n, cfg.d_emb, m.hidden_, o));

    Rng rng(cfg.seed);
    auto glorot = [&rng](DenseMatrix& w) {
        double a = std::sqrt(6.0 / static_cast<double>(w.rows + w.cols));
        for (double& x : w.data) x = rng.uniform_real(-a, a);
    };
    int32_t n_tables = cfg.tied_embeddings ? 1 : n;
    for (int32_t t = 0; t < n_tables; ++t) {
        m.embeddings_.emplace_back(m.schema_[static_cast<size_t>(t)].vocab.size() + 1, cfg.d_emb);
        glorot(m.embeddings_.back());
    }
    int64_t nd = static_cast<int64_t>(n) * cfg.d_emb;
    auto make_layer = [&](int64_t in, int64_t out) {
        MaskedLayer l;
        l.w = DenseMatrix(in, out);
        glorot(l.w);
        l.b = DenseMatrix(1, out);
        if (cfg.orders > 1) {
            l.cond = DenseMatrix(in, out);
            glorot(l.cond);
        }
        return l;
    };
    m.input_proj_ = make_layer(nd, m.hidden_);
    for (int32_t i = 0; i < cfg.blocks * cfg.layers_per_block; ++i)
        m.trunk_.push_back(make_layer(m.hidden_, m.hidden_));
    m.output_proj_ = make_layer(m.hidden_, nd);
    return m;
}

const DenseMatrix& ArModel::embedding_table(int32_t col) const {
    return embeddings_[cfg_.tied_embeddings ? 0 : static_cast<size_t>(col)];
}
DenseMatrix& ArModel::embedding_table_mut(int32_t col) {
    return embeddings_[cfg_.tied_embeddings ? 0 : static_cast<size_t>(col)];
}
int32_t ArModel::embedding_grad_index(int32_t col) const {
    return cfg_.tied_embeddings ? 0 : col;
}
const DenseMatrix& ArModel::embedding(int32_t col) const { return embedding_table(col); }

int64_t ArModel::param_count() const {
    int64_t total = 0;
    for (const auto& e : embeddings_) total += static_cast<int64_t>(e.size());
    auto add = [&](const MaskedLayer& l) {
        total += static_cast<int64_t>(l.w.size() + l.b.size() + l.cond.size());
    };
    add(input_proj_);
    for (const auto& l : trunk_) add(l);
    add(output_proj_);
    return total;
}

std::vector<DenseMatrix*> ArModel::params() {
    std::vector<DenseMatrix*> p;
    for (auto& e : embeddings_) p.push_back(&e);
    auto add = [&](MaskedLayer& l) {
        p.push_back(&l.w);
        p.push_back(&l.b);
        if (!l.cond.empty()) p.push_back(&l.cond);
    };
    add(input_proj_);
    for (auto& l : trunk_) add(l);
    add(output_proj_);
    return p;
}

std::vector<DenseMatrix> ArModel::zero_grads() const {
    std::vector<DenseMatrix> g;
    for (const auto& e : embeddings_) g.emplace_back(e.rows, e.cols);
    auto add = [&](const MaskedLayer& l) {
        g.emplace_back(l.w.rows, l.w.cols);
        g.emplace_back(l.b.rows, l.b.cols);
        if (!l.cond.empty()) g.emplace_back(l.cond.rows, l.cond.cols);
    };
    add(input_proj_);
    for (const auto& l : trunk_) add(l);
    add(output_proj_);
    return g;
}

DenseMatrix ArModel::encode_inputs(std::span<const int32_t> codes, int64_t batch) const {
    const int32_t n = n_cols();
    const int32_t d = cfg_.d_emb;
    if (static_cast<int64_t>(codes.size()) != batch * n)
        fail_invalid("codes length does not match batch × n_cols");
    DenseMatrix x(batch, static_cast<int64_t>(n) * d);
    for (int64_t b = 0; b < batch; ++b) {
        double* xr = x.row(b);
        for (int32_t c = 0; c < n; ++c) {
            int32_t code = codes[static_cast<size_t>(b * n + c)];
            int32_t v = schema_[static_cast<size_t>(c)].vocab.size();
            int32_t row = (code == kMaskCode) ? v : code;
            if (row < 0 || row > v)
                fail_invalid("input code " + std::to_string(code) + " out of range for column " +
                             std::to_string(c));
            std::memcpy(xr + static_cast<int64_t>(c) * d, embedding_table(c).row(row),
                        static_cast<size_t>(d) * sizeof(double));
        }
    }
    return x;
}

void ArModel::trunk_forward(const DenseMatrix& x, int32_t order, Cache& cc) const {
    const MadeMasks& mk = masks_[static_cast<size_t>(order)];
    const int32_t L = cfg_.layers_per_block;
    cc.a.resize(static_cast<size_t>(cfg_.blocks) + 1);
    cc.r.resize(static_cast<size_t>(cfg_.blocks) * static_cast<size_t>(L));
    cc.s.resize(cc.r.size());
    cc.a[0] = masked_affine(x, input_proj_.w, mk.input, input_proj_.b, cond_ptr(input_proj_));
    for (int32_t blk = 0; blk < cfg_.blocks; ++blk) {
        for (int32_t l = 0; l < L; ++l) {
            size_t idx = static_cast<size_t>(blk) * static_cast<size_t>(L) + static_cast<size_t>(l);
            cc.r[idx] = (l == 0) ? cc.a[static_cast<size_t>(blk)] : cc.s[idx - 1];
            relu_inplace(cc.r[idx]);
            const MaskedLayer& layer = trunk_[idx];
            cc.s[idx] = masked_affine(cc.r[idx], layer.w, mk.hidden, layer.b, cond_ptr(layer));
        }
        cc.a[static_cast<size_t>(blk) + 1] = cc.a[static_cast<size_t>(blk)];
        if (L > 0)
            add_inplace(cc.a[static_cast<size_t>(blk) + 1],
                        cc.s[static_cast<size_t>(blk) * static_cast<size_t>(L) +
                             static_cast<size_t>(L) - 1]);
    }
    cc.hf = cc.a[static_cast<size_t>(cfg_.blocks)];
    relu_inplace(cc.hf);
}

std::vector<DenseMatrix> ArModel::forward_dists(std::span<const int32_t> codes, int64_t batch,
                                                int32_t order) const {
    if (order < 0 || order >= static_cast<int32_t>(orderings_.size()))
        fail_invalid("ordering index out of range");
    const int32_t n = n_cols();
    const int32_t d = cfg_.d_emb;
    Cache cc;
    cc.x = encode_inputs(codes, batch);
    trunk_forward(cc.x, order, cc);
    const MadeMasks& mk = masks_[static_cast<size_t>(order)];
    DenseMatrix out = masked_affine(cc.hf, output_proj_.w, mk.output, output_proj_.b,
                                    cond_ptr(output_proj_));
    std::vector<DenseMatrix> probs(static_cast<size_t>(n));
    DenseMatrix h;
    for (int32_t c = 0; c < n; ++c) {
        copy_col_block(out, static_cast<int64_t>(c) * d, d, h);
        matmul_nt_rows(h, embedding_table(c), schema_[static_cast<size_t>(c)].vocab.size(),
                       probs[static_cast<size_t>(c)]);
        softmax_rows(probs[static_cast<size_t>(c)]);
    }
    return probs;
}

DenseMatrix ArModel::conditional(std::span<const int32_t> codes, int64_t batch, int32_t position,
                                 int32_t order) const {
    if (order < 0 || order >= static_cast<int32_t>(orderings_.size()))
        fail_invalid("ordering index out of range");
    const int32_t n = n_cols();
    if (position < 0 || position >= n) fail_invalid("position out of range");
    const int32_t c = orderings_[static_cast<size_t>(order)][static_cast<size_t>(position)];
    const int32_t d = cfg_.d_emb;
    const int32_t v = schema_[static_cast<size_t>(c)].vocab.size();

    Cache cc;
    cc.x = encode_inputs(codes, batch);
    trunk_forward(cc.x, order, cc);

    // Output projection restricted to this column's block.
    const MadeMasks& mk = masks_[static_cast<size_t>(order)];
    int64_t col0 = static_cast<int64_t>(c) * d;
    DenseMatrix wblk, mblk, bblk(1, d);
    copy_col_block(output_proj_.w, col0, d, wblk);
    copy_col_block(mk.output, col0, d, mblk);
    std::memcpy(bblk.row(0), output_proj_.b.row(0) + col0, static_cast<size_t>(d) * sizeof(double));
    DenseMatrix cblk;
    const DenseMatrix* cp = nullptr;
    if (!output_proj_.cond.empty()) {
        copy_col_block(output_proj_.cond, col0, d, cblk);
        cp = &cblk;
    }
    DenseMatrix h = masked_affine(cc.hf, wblk, mblk, bblk, cp);
    DenseMatrix probs;
    matmul_nt_rows(h, embedding_table(c), v, probs);
    softmax_rows(probs);
    return probs;
}

double ArModel::loss(std::span<const int32_t> codes, std::span<const int32_t> targets,
                     int64_t batch, int32_t order) const {
    auto probs = forward_dists(codes, batch, order);
    const int32_t n = n_cols();
    double total = 0.0;
    for (int64_t b = 0; b < batch; ++b)
        for (int32_t c = 0; c < n; ++c) {
            int32_t t = targets[static_cast<size_t>(b * n + c)];
            if (t < 0 || t >= schema_[static_cast<size_t>(c)].vocab.size())
                fail_invalid("target out of range at row " + std::to_string(b) + " column " +
                             std::to_string(c));
            total -= std::log(probs[static_cast<size_t>(c)].at(b, t));
        }
    double l = total / static_cast<double>(batch);
    if (!std::isfinite(l)) fail_runtime("non-finite loss");
    return l;
}

double ArModel::loss_and_grads(std::span<const int32_t> codes, std::span<const int32_t> targets,
                               int64_t batch, int32_t order,
                               std::vector<DenseMatrix>& grads) const {
    if (order < 0 || order >= static_cast<int32_t>(orderings_.size()))
        fail_invalid("ordering index out of range");
    const int32_t n = n_cols();
    const int32_t d = cfg_.d_emb;
    const int32_t L = cfg_.layers_per_block;
    const MadeMasks& mk = masks_[static_cast<size_t>(order)];
    grads = zero_grads();

    // Gradient slot layout mirrors params().
    const size_t n_tables = embeddings_.size();
    size_t cursor = n_tables;
    const bool has_cond = cfg_.orders > 1;
    auto layer_slots = [&cursor, has_cond]() {
        size_t w = cursor++;
        size_t b = cursor++;
        size_t cd = has_cond ? cursor++ : SIZE_MAX;
        return std::array<size_t, 3>{w, b, cd};
    };
    auto in_slots = layer_slots();
    std::vector<std::array<size_t, 3>> trunk_slots;
    for (size_t i = 0; i < trunk_.size(); ++i) trunk_slots.push_back(layer_slots());
    auto out_slots = layer_slots();

    Cache cc;
    cc.x = encode_inputs(codes, batch);
    trunk_forward(cc.x, order, cc);
    DenseMatrix out =
        masked_affine(cc.hf, output_proj_.w, mk.output, output_proj_.b, cond_ptr(output_proj_));

    // Tied output layer: per-column softmax over real vocab rows.
    std::vector<DenseMatrix> h(static_cast<size_t>(n)), probs(static_cast<size_t>(n));
    double total = 0.0;
    for (int32_t c = 0; c < n; ++c) {
        copy_col_block(out, static_cast<int64_t>(c) * d, d, h[static_cast<size_t>(c)]);
        matmul_nt_rows(h[static_cast<size_t>(c)], embedding_table(c),
                       schema_[static_cast<size_t>(c)].vocab.size(), probs[static_cast<size_t>(c)]);
        softmax_rows(probs[static_cast<size_t>(c)]);
    }
    for (int64_t b = 0; b < batch; ++b)
        for (int32_t c = 0; c < n; ++c) {
            int32_t t = targets[static_cast<size_t>(b * n + c)];
            if (t < 0 || t >= schema_[static_cast<size_t>(c)].vocab.size())
                fail_invalid("target out of range at row " + std::to_string(b) + " column " +
                             std::to_string(c));
            total -= std::log(probs[static_cast<size_t>(c)].at(b, t));
        }
    double loss = total / static_cast<double>(batch);
    if (!std::isfinite(loss)) fail_runtime("non-finite loss");

    const double inv_b = 1.0 / static_cast<double>(batch);
    DenseMatrix dout(batch, static_cast<int64_t>(n) * d);
    DenseMatrix dh;
    for (int32_t c = 0; c < n; ++c) {
        int32_t v = schema_[static_cast<size_t>(c)].vocab.size();
        DenseMatrix dlog = probs[static_cast<size_t>(c)];
        for (int64_t b = 0; b < batch; ++b)
            dlog.at(b, targets[static_cast<size_t>(b * n + c)]) -= 1.0;
        for (double& x : dlog.data) x *= inv_b;
        // output-path embedding gradient and hidden-feature gradient
        matmul_tn_acc_rows(dlog, h[static_cast<size_t>(c)],
                           grads[static_cast<size_t>(embedding_grad_index(c))], v);
        matmul_rows(dlog, embedding_table(c), v, dh);
        add_col_block(dout, static_cast<int64_t>(c) * d, d, dh);
    }

    DenseMatrix dhf;
    backward_affine(cc.hf, dout, output_proj_, mk.output, grads[out_slots[0]], grads[out_slots[1]],
                    has_cond ? &grads[out_slots[2]] : nullptr, &dhf);
    relu_backward(cc.a[static_cast<size_t>(cfg_.blocks)], dhf);
    DenseMatrix da = std::move(dhf);

    DenseMatrix dr;
    for (int32_t blk = cfg_.blocks - 1; blk >= 0; --blk) {
        DenseMatrix g = da;
        for (int32_t l = L - 1; l >= 0; --l) {
            size_t idx = static_cast<size_t>(blk) * static_cast<size_t>(L) + static_cast<size_t>(l);
            const auto& slots = trunk_slots[idx];
            backward_affine(cc.r[idx], g, trunk_[idx], mk.hidden, grads[slots[0]], grads[slots[1]],
                            has_cond ? &grads[slots[2]] : nullptr, &dr);
            const DenseMatrix& pre = (l == 0) ? cc.a[static_cast<size_t>(blk)] : cc.s[idx - 1];
            relu_backward(pre, dr);
            g = std::move(dr);
            dr = DenseMatrix();
        }
        add_inplace(da, g);
    }

    DenseMatrix dx;
    backward_affine(cc.x, da, input_proj_, mk.input, grads[in_slots[0]], grads[in_slots[1]],
                    has_cond ? &grads[in_slots[2]] : nullptr, &dx);

    // Input-path embedding gradient (scatter-add, MASK rows included).
    for (int64_t b = 0; b < batch; ++b) {
        const double* dxr = dx.row(b);
        for (int32_t c = 0; c < n; ++c) {
            int32_t code = codes[static_cast<size_t>(b * n + c)];
            int32_t v = schema_[static_cast<size_t>(c)].vocab.size();
            int32_t row = (code == kMaskCode) ? v : code;
            double* gr = grads[static_cast<size_t>(embedding_grad_index(c))].row(row);
            const double* src = dxr + static_cast<int64_t>(c) * d;
            for (int32_t e = 0; e < d; ++e) gr[e] += src[e];
        }
    }
    return loss;
}

// ----------------------------------------------------------- checkpoints --

void ArModel::save(const std::string& path) const {
    BinWriter w(path);
    write_magic(w, kModelMagic, kModelVersion);
    w.u32(static_cast<uint32_t>(cfg_.epochs));
    w.u32(static_cast<uint32_t>(cfg_.batch_size));
    w.u32(static_cast<uint32_t>(cfg_.blocks));
    w.u32(static_cast<uint32_t>(cfg_.layers_per_block));
    w.u32(static_cast<uint32_t>(cfg_.hidden));
    w.u32(static_cast<uint32_t>(cfg_.d_emb));
    w.f64(cfg_.lr);
    w.f64(cfg_.warmup_epochs);
    w.str(cfg_.mask_mode);
    w.f64(cfg_.mask_p);
    w.u32(static_cast<uint32_t>(cfg_.orders));
    w.u64(cfg_.seed);
    w.u8(cfg_.tied_embeddings ? 1 : 0);
    w.u32(static_cast<uint32_t>(hidden_));

    w.u32(static_cast<uint32_t>(schema_.size()));
    for (const Column& col : schema_) {
        w.str(col.name);
        w.u32(static_cast<uint32_t>(col.vocab.size()));
        for (const std::string& v : col.vocab.values()) w.str(v);
    }
    for (const Ordering& o : orderings_)
        for (int32_t k : o) w.u32(static_cast<uint32_t>(k));
    for (const MadeMasks& mk : masks_) {
        for (const DenseMatrix* m : {&mk.input, &mk.hidden, &mk.output}) {
            std::vector<uint8_t> bits(m->size());
            for (size_t i = 0; i < m->size(); ++i) bits[i] = m->data[i] != 0.0 ? 1 : 0;
            w.u8_array(bits.data(), bits.size());
        }
    }
    ArModel& self = const_cast<ArModel&>(*this);
    auto ps = self.params();
    w.u32(static_cast<uint32_t>(ps.size()));
    for (const DenseMatrix* p : ps) {
        w.u64(static_cast<uint64_t>(p->rows));
        w.u64(static_cast<uint64_t>(p->cols));
        w.f64_array(p->data.data(), p->size());
    }
    w.finish();
}

ArModel ArModel::load(const std::string& path) {
    BinReader r(path);
    r.expect_magic(kModelMagic, kModelVersion, "model checkpoint");
    ModelConfig cfg;
    cfg.epochs = static_cast<int32_t>(r.u32());
    cfg.batch_size = static_cast<int32_t>(r.u32());
    cfg.blocks = static_cast<int32_t>(r.u32());
    cfg.layers_per_block = static_cast<int32_t>(r.u32());
    cfg.hidden = static_cast<int32_t>(r.u32());
    cfg.d_emb = static_cast<int32_t>(r.u32());
    cfg.lr = r.f64();
    cfg.warmup_epochs = r.f64();
    cfg.mask_mode = r.str();
    cfg.mask_p = r.f64();
    cfg.orders = static_cast<int32_t>(r.u32());
    cfg.seed = r.u64();
    cfg.tied_embeddings = r.u8() != 0;
    int32_t hidden_actual = static_cast<int32_t>(r.u32());

    uint32_t n = r.u32();
    std::vector<Column> schema(n);
    for (uint32_t c = 0; c < n; ++c) {
        schema[c].name = r.str();
        uint32_t vs = r.u32();
        std::vector<std::string> vals(vs);
        for (uint32_t i = 0; i < vs; ++i) vals[i] = r.str();
        schema[c].vocab = Vocab::build(vals);
        if (schema[c].vocab.values() != vals)
            fail_io("'" + path + "': vocab for column '" + schema[c].name +
                    "' not in canonical order");
    }

    // Rebuild the deterministic skeleton, then overwrite parameters.
    ArModel m = ArModel::init(schema, cfg);
    if (m.hidden_ != hidden_actual)
        fail_io("'" + path + "': trunk width mismatch (file " + std::to_string(hidden_actual) +
                ", rebuilt " + std::to_string(m.hidden_) + ")");
    for (Ordering& o : m.orderings_)
        for (int32_t& k : o) k = static_cast<int32_t>(r.u32());
    m.masks_.clear();
    for (const Ordering& o : m.orderings_)
        m.masks_.push_back(build_made_masks(static_cast<int32_t>(n), cfg.d_emb, m.hidden_, o));
    for (const MadeMasks& mk : m.masks_) {
        for (const DenseMatrix* mm : {&mk.input, &mk.hidden, &mk.output}) {
            std::vector<uint8_t> bits(mm->size());
            r.u8_array(bits.data(), bits.size());
            for (size_t i = 0; i < bits.size(); ++i)
                if ((mm->data[i] != 0.0 ? 1 : 0) != bits[i])
                    fail_io("'" + path + "': stored connectivity masks do not match orderings");
        }
    }
    auto ps = m.params();
    uint32_t count = r.u32();
    if (count != ps.size()) fail_io("'" + path + "': parameter count mismatch");
    for (DenseMatrix* p : ps) {
        int64_t rows = static_cast<int64_t>(r.u64());
        int64_t cols = static_cast<int64_t>(r.u64());
        if (rows != p->rows || cols != p->cols)
            fail_io("'" + path + "': parameter shape mismatch");
        r.f64_array(p->data.data(), p->size());
    }
    return m;
}

}  // namespace varskip
