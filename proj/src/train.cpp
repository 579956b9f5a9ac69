#include "varskip/train.hpp"

#include <cmath>
#include <cstring>
#include <numeric>

#include "varskip/adam.hpp"
#include "varskip/error.hpp"

namespace varskip {

namespace {

constexpr double kLn2 = 0.6931471805599453;

void fill_batch(const Table& table, const std::vector<int64_t>& perm, int64_t start, int64_t count,
                std::vector<int32_t>& out) {
    const int32_t n = table.n_cols();
    out.resize(static_cast<size_t>(count * n));
    for (int64_t i = 0; i < count; ++i) {
        auto row = table.row(perm[static_cast<size_t>(start + i)]);
        std::memcpy(out.data() + i * n, row.data(), static_cast<size_t>(n) * sizeof(int32_t));
    }
}

}  // namespace

double eval_nll_bits(const ArModel& model, const Table& table) {
    if (static_cast<int32_t>(table.n_cols()) != model.n_cols())
        fail_invalid("eval: table and model column counts differ");
    const int64_t m = table.n_rows();
    const int64_t bs = model.config().batch_size;
    const int32_t orders = static_cast<int32_t>(model.orderings().size());
    std::vector<int64_t> perm(static_cast<size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int32_t> batch;
    double total = 0.0;
    for (int32_t o = 0; o < orders; ++o)
        for (int64_t start = 0; start < m; start += bs) {
            int64_t count = std::min(bs, m - start);
            fill_batch(table, perm, start, count, batch);
            total += model.loss(batch, batch, count, o) * static_cast<double>(count);
        }
    return total / (static_cast<double>(m) * orders) / kLn2;
}

std::vector<EpochLog> train(ArModel& model, const Table& table, Rng& rng, const EpochCallback& cb) {
    if (static_cast<int32_t>(table.n_cols()) != model.n_cols())
        fail_invalid("train: table and model column counts differ");
    const ModelConfig& cfg = model.config();
    const int32_t n = model.n_cols();
    const int64_t m = table.n_rows();
    const int64_t bs = cfg.batch_size;
    const int32_t orders = static_cast<int32_t>(model.orderings().size());
    const int64_t steps_per_epoch = (m + bs - 1) / bs;
    const int64_t warmup_steps =
        static_cast<int64_t>(std::llround(cfg.warmup_epochs * static_cast<double>(steps_per_epoch)));

    auto params = model.params();
    AdamState state = AdamState::init(params);
    std::vector<DenseMatrix> grads;
    std::vector<int64_t> perm(static_cast<size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int32_t> targets, codes;
    std::vector<EpochLog> log;

    int64_t step = 0;
    for (int32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (int64_t i = m - 1; i > 0; --i) {
            int64_t j = static_cast<int64_t>(rng.uniform_u64(static_cast<uint64_t>(i + 1)));
            std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
        }
        double loss_sum = 0.0;
        for (int64_t start = 0, batch_index = 0; start < m; start += bs, ++batch_index) {
            int64_t count = std::min(bs, m - start);
            int32_t order = orders > 1 ? rng.uniform_int(orders) : 0;
            const Ordering& ord = model.orderings()[static_cast<size_t>(order)];
            fill_batch(table, perm, start, count, targets);
            codes = targets;
            if (model.mask_trained())
                for (int64_t i = 0; i < count; ++i) {
                    MaskPlan plan = sample_mask_plan(rng, n, cfg.mask_mode, cfg.mask_p);
                    for (int32_t pos : plan.positions)
                        codes[static_cast<size_t>(i * n + ord[static_cast<size_t>(pos)])] =
                            kMaskCode;
                }
            double lr = cfg.lr;
            if (step < warmup_steps)
                lr *= static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
            try {
                double loss = model.loss_and_grads(codes, targets, count, order, grads);
                adam_step(params, grads, state, lr);
                loss_sum += loss * static_cast<double>(count);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::runtime) throw;
                fail_runtime("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_index) + ": " + e.what());
            }
            ++step;
        }
        EpochLog entry;
        entry.epoch = epoch;
        entry.train_nll_bits = loss_sum / static_cast<double>(m) / kLn2;
        entry.eval_nll_bits = eval_nll_bits(model, table);
        log.push_back(entry);
        if (cb) cb(entry);
    }
    return log;
}

}  // namespace varskip
