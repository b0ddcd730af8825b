#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>

#include "phasegen/autograd.hpp"

namespace phasegen::nn {

using ag::Mat;
using ag::ParamStore;
using ag::Tape;
using ag::Var;

inline int worker_count() {
    if (const char* env = std::getenv("PHASEGEN_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

struct Linear {
    int weight = -1;
    int bias = -1;

    static Linear create(ParamStore& store, const std::string& name, int in, int out, Rng& rng) {
        Linear l;
        l.weight = store.add(name + ".weight", ag::xavier_init(in, out, rng));
        l.bias = store.add(name + ".bias", Mat::Zero(1, out));
        return l;
    }

    Var apply(Tape& tape, const ParamStore& store, Var x) const {
        Var y = tape.matmul(x, tape.param(store, weight));
        return tape.add(y, tape.bcast_row(tape.param(store, bias),
                                          static_cast<int>(tape.value(y).rows())));
    }
};

struct Conv1d {
    int weight = -1;
    int bias = -1;
    int kernel = 0;

    static Conv1d create(ParamStore& store, const std::string& name, int in, int out, int kernel,
                         Rng& rng) {
        Conv1d c;
        c.kernel = kernel;
        c.weight = store.add(name + ".weight", ag::xavier_init(kernel * in, out, rng));
        c.bias = store.add(name + ".bias", Mat::Zero(1, out));
        return c;
    }

    Var apply(Tape& tape, const ParamStore& store, Var x) const {
        return tape.conv1d(x, tape.param(store, weight), tape.param(store, bias), kernel);
    }
};

struct LayerNorm {
    int gamma = -1;
    int beta = -1;

    static LayerNorm create(ParamStore& store, const std::string& name, int dim) {
        LayerNorm ln;
        ln.gamma = store.add(name + ".gamma", Mat::Ones(1, dim));
        ln.beta = store.add(name + ".beta", Mat::Zero(1, dim));
        return ln;
    }

    Var apply(Tape& tape, const ParamStore& store, Var x) const {
        const int n = static_cast<int>(tape.value(x).rows());
        const int d = static_cast<int>(tape.value(x).cols());
        Var mean = tape.scale(tape.row_sum(x), 1.0 / d);
        Var centered = tape.sub(x, tape.bcast_col(mean, d));
        Var variance = tape.scale(tape.row_sum(tape.square(centered)), 1.0 / d);
        Var inv_std = tape.pow_scalar(tape.add_scalar(variance, 1e-6), -0.5);
        Var normed = tape.mul(centered, tape.bcast_col(inv_std, d));
        Var scaled = tape.mul(normed, tape.bcast_row(tape.param(store, gamma), n));
        return tape.add(scaled, tape.bcast_row(tape.param(store, beta), n));
    }
};

// Pre-LN transformer encoder layer: x += MHA(LN(x)); x += FFN(LN(x)).
struct TransformerLayer {
    Linear wq, wk, wv, wo, ff1, ff2;
    LayerNorm ln1, ln2;
    int heads = 1;
    int width = 0;

    static TransformerLayer create(ParamStore& store, const std::string& name, int width,
                                   int heads, int ff_width, Rng& rng) {
        if (width % heads != 0) throw ConfigError("transformer: width must divide by heads");
        TransformerLayer l;
        l.heads = heads;
        l.width = width;
        l.wq = Linear::create(store, name + ".wq", width, width, rng);
        l.wk = Linear::create(store, name + ".wk", width, width, rng);
        l.wv = Linear::create(store, name + ".wv", width, width, rng);
        l.wo = Linear::create(store, name + ".wo", width, width, rng);
        l.ff1 = Linear::create(store, name + ".ff1", width, ff_width, rng);
        l.ff2 = Linear::create(store, name + ".ff2", ff_width, width, rng);
        l.ln1 = LayerNorm::create(store, name + ".ln1", width);
        l.ln2 = LayerNorm::create(store, name + ".ln2", width);
        return l;
    }

    Var apply(Tape& tape, const ParamStore& store, Var x) const {
        const int head_dim = width / heads;
        Var normed = ln1.apply(tape, store, x);
        Var q = wq.apply(tape, store, normed);
        Var k = wk.apply(tape, store, normed);
        Var v = wv.apply(tape, store, normed);
        std::vector<Var> head_outputs;
        head_outputs.reserve(static_cast<size_t>(heads));
        for (int h = 0; h < heads; ++h) {
            Var qh = tape.slice_cols(q, h * head_dim, head_dim);
            Var kh = tape.slice_cols(k, h * head_dim, head_dim);
            Var vh = tape.slice_cols(v, h * head_dim, head_dim);
            Var scores = tape.scale(tape.matmul(qh, tape.transpose(kh)),
                                    1.0 / std::sqrt(static_cast<double>(head_dim)));
            Var attn = tape.softmax_rows(scores);
            head_outputs.push_back(tape.matmul(attn, vh));
        }
        Var attended = wo.apply(tape, store, tape.concat_cols(head_outputs));
        Var mid = tape.add(x, attended);

        Var normed2 = ln2.apply(tape, store, mid);
        Var ff = ff2.apply(tape, store, tape.tanh(ff1.apply(tape, store, normed2)));
        return tape.add(mid, ff);
    }
};

// Classic sinusoidal position/step embedding, 1 x dim.
inline Mat sinusoid_embed(double position, int dim) {
    Mat e(1, dim);
    const int half = dim / 2;
    for (int i = 0; i < half; ++i) {
        const double freq = std::exp(-std::log(10000.0) * i / half);
        e(0, 2 * i) = std::sin(position * freq);
        e(0, 2 * i + 1) = std::cos(position * freq);
    }
    if (dim % 2 == 1) e(0, dim - 1) = 0.0;
    return e;
}

// Exponential learning-rate decay from lr_start to lr_end over total steps.
inline double decayed_lr(long step, long total_steps, double lr_start, double lr_end) {
    if (total_steps <= 1) return lr_start;
    const double t = static_cast<double>(std::min(step, total_steps - 1)) / (total_steps - 1);
    return lr_start * std::pow(lr_end / lr_start, t);
}

struct BatchStats {
    double loss_sum = 0.0;
    long count = 0;

    double mean() const { return count > 0 ? loss_sum / count : 0.0; }
};

// Data-parallel gradient accumulation with deterministic reduction: items
// are split into fixed shards, each shard accumulates its own buffer, and
// buffers merge in shard order, so results do not depend on thread count.
// `build_loss` constructs the per-item graph and returns the loss node.
template <typename Item, typename BuildLoss>
BatchStats accumulate_gradients(ParamStore& store, const std::vector<Item>& items,
                                BuildLoss build_loss, int n_threads = 0) {
    if (n_threads <= 0) n_threads = worker_count();
    const int n_items = static_cast<int>(items.size());
    if (n_items == 0) return {};
    const int n_shards = std::min(8, n_items);

    struct ShardAccum {
        std::vector<Mat> grads;
        double loss_sum = 0.0;
        long count = 0;
    };
    std::vector<ShardAccum> shards(static_cast<size_t>(n_shards));
    for (ShardAccum& s : shards) {
        s.grads.resize(static_cast<size_t>(store.size()));
        for (int p = 0; p < store.size(); ++p)
            s.grads[static_cast<size_t>(p)] =
                Mat::Zero(store.at(p).value.rows(), store.at(p).value.cols());
    }

    std::atomic<int> next_shard{0};
    auto run_worker = [&]() {
        while (true) {
            const int s = next_shard.fetch_add(1);
            if (s >= n_shards) break;
            ShardAccum& accum = shards[static_cast<size_t>(s)];
            const int lo = s * n_items / n_shards;
            const int hi = (s + 1) * n_items / n_shards;
            for (int i = lo; i < hi; ++i) {
                Tape tape;
                Var loss = build_loss(items[static_cast<size_t>(i)], tape);
                tape.backward(loss);
                tape.export_param_grads([&accum](int p, const Mat& g) {
                    accum.grads[static_cast<size_t>(p)] += g;
                });
                accum.loss_sum += tape.scalar(loss);
                ++accum.count;
            }
        }
    };

    if (n_threads == 1) {
        run_worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < std::min(n_threads, n_shards); ++t) pool.emplace_back(run_worker);
        for (std::thread& t : pool) t.join();
    }

    BatchStats stats;
    for (const ShardAccum& s : shards) {
        for (int p = 0; p < store.size(); ++p) store.at(p).grad += s.grads[static_cast<size_t>(p)];
        stats.loss_sum += s.loss_sum;
        stats.count += s.count;
    }
    return stats;
}

}  // namespace phasegen::nn
