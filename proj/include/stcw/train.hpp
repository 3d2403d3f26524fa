#pragma once

#include <limits>
#include <optional>

#include "stcw/net.hpp"

namespace stcw {

struct TrainConfig {
    double learning_rate = 0.02;
    double momentum = 0.9;
    std::size_t iterations = 300;
    std::size_t batch_size = 16;
    std::size_t conv_freeze_iters = 50;  // conv params receive no update before this
    double weight_decay = 1e-4;
    std::uint64_t seed = 0;
    std::size_t eval_every = 50;  // 0 disables periodic eval

    void validate() const {
        if (momentum < 0.0 || momentum >= 1.0) throw ValidationError("momentum must be in [0,1)");
        if (weight_decay < 0.0) throw ValidationError("weight_decay must be >= 0");
        if (batch_size == 0) throw ValidationError("batch_size must be positive");
        if (!std::isfinite(learning_rate)) throw ValidationError("learning_rate must be finite");
    }
};

template <typename S>
struct Batch {
    Tensor<S> x;  // (N,C,H,W) or (N,C,T,H,W)
    std::vector<std::size_t> labels;

    std::size_t count() const { return x.dim(0); }
};

struct EvalPoint {
    std::size_t iteration;
    double accuracy;
};

struct TrainMetrics {
    std::vector<double> loss;          // one entry per iteration
    std::vector<EvalPoint> eval_acc;   // periodic test accuracy, if a test set was given
};

// Classic momentum with L2 decay: v <- m*v - lr*(g + wd*w); w <- w + v.
// Conv layers are skipped entirely while iter < conv_freeze_iters.
template <typename S>
void sgd_step(const NetSpec& spec, Params<S>& params, const Grads<S>& grads, Params<S>& velocity,
              const TrainConfig& cfg, std::size_t iter) {
    for (const LayerSpec& layer : spec.layers) {
        if (!layer.has_params()) continue;
        if (layer.is_conv() && iter < cfg.conv_freeze_iters) continue;
        auto& p = params.at(layer.name);
        const auto& g = grads.at(layer.name);
        auto& v = velocity.at(layer.name);
        auto update = [&](Tensor<S>& w, const Tensor<S>& gw, Tensor<S>& vw, double wd) {
            for (std::size_t i = 0; i < w.size(); ++i) {
                vw[i] = static_cast<S>(cfg.momentum * vw[i] -
                                       cfg.learning_rate * (gw[i] + wd * w[i]));
                w[i] += vw[i];
            }
        };
        update(p.weight, g.weight, v.weight, cfg.weight_decay);
        update(p.bias, g.bias, v.bias, 0.0);  // no decay on biases
    }
}

template <typename S>
std::pair<double, Tensor<S>> evaluate(const NetSpec& spec, const Params<S>& params,
                                      const Batch<S>& data, std::size_t eval_batch = 64) {
    if (data.count() == 0) throw ValidationError("evaluate: empty dataset");
    if (data.labels.size() != data.count()) throw ValidationError("evaluate: label count mismatch");
    const std::size_t n = data.count(), k = spec.num_classes;
    Tensor<S> probs({n, k});
    Rng rng(0);  // unused: dropout is identity in eval mode
    std::size_t correct = 0;
    Shape item_shape = data.x.shape();
    for (std::size_t start = 0; start < n; start += eval_batch) {
        std::size_t count = std::min(eval_batch, n - start);
        Shape bshape = item_shape;
        bshape[0] = count;
        std::size_t item = data.x.size() / n;
        Tensor<S> bx(bshape);
        std::copy(data.x.data().begin() + start * item,
                  data.x.data().begin() + (start + count) * item, bx.data().begin());
        auto trace = net_forward(spec, params, bx, /*train_mode=*/false, rng);
        for (std::size_t i = 0; i < count; ++i) {
            std::size_t best = 0;
            for (std::size_t j = 0; j < k; ++j) {
                probs[(start + i) * k + j] = trace.probs[i * k + j];
                if (trace.probs[i * k + j] > trace.probs[i * k + best]) best = j;  // ties -> lowest
            }
            if (best == data.labels[start + i]) ++correct;
        }
    }
    return {static_cast<double>(correct) / static_cast<double>(n), std::move(probs)};
}

// Single-threaded deterministic SGD loop.  Batches are sampled with
// replacement from a seeded stream; dropout masks come from a second split of
// the same seed, so identical configs replay bit-identically.
template <typename S>
TrainMetrics train(const NetSpec& spec, Params<S>& params, const Batch<S>& train_set,
                   const TrainConfig& cfg, const Batch<S>* test_set = nullptr) {
    cfg.validate();
    validate_spec(spec);
    check_params_match(spec, params);
    if (train_set.count() == 0) throw ValidationError("train: empty dataset");
    if (train_set.labels.size() != train_set.count())
        throw ValidationError("train: label count mismatch");

    Rng sample_rng = Rng(cfg.seed).split(1);
    Rng dropout_rng = Rng(cfg.seed).split(2);

    Params<S> velocity;
    for (const auto& [name, p] : params)
        velocity[name] = {zeros<S>(p.weight.shape()), zeros<S>(p.bias.shape())};

    const std::size_t n = train_set.count();
    const std::size_t item = train_set.x.size() / n;
    Shape bshape = train_set.x.shape();
    bshape[0] = cfg.batch_size;

    TrainMetrics metrics;
    for (std::size_t iter = 0; iter < cfg.iterations; ++iter) {
        Tensor<S> bx(bshape);
        std::vector<std::size_t> by(cfg.batch_size);
        for (std::size_t i = 0; i < cfg.batch_size; ++i) {
            std::size_t idx = sample_rng.next_below(n);
            std::copy(train_set.x.data().begin() + idx * item,
                      train_set.x.data().begin() + (idx + 1) * item,
                      bx.data().begin() + i * item);
            by[i] = train_set.labels[idx];
        }
        auto trace = net_forward(spec, params, bx, /*train_mode=*/true, dropout_rng);
        metrics.loss.push_back(cross_entropy(trace.probs, by));
        auto grads = net_backward(spec, params, trace, by);
        sgd_step(spec, params, grads, velocity, cfg, iter);

        if (test_set && cfg.eval_every > 0 &&
            ((iter + 1) % cfg.eval_every == 0 || iter + 1 == cfg.iterations)) {
            auto [acc, probs] = evaluate(spec, params, *test_set);
            metrics.eval_acc.push_back({iter + 1, acc});
        }
    }
    return metrics;
}

}  // namespace stcw
