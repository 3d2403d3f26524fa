#pragma once

#include "stcw/net.hpp"

namespace stcw {

// Central-difference oracle for the analytic backward pass.  Works in f64
// only; finite differences are unreliable in f32.  Dropout masks are replayed
// by reseeding the forward rng identically for every loss evaluation.

inline double gradcheck_loss(const NetSpec& spec, const Params<double>& params,
                             const Tensor<double>& x, const std::vector<std::size_t>& labels,
                             std::uint64_t dropout_seed) {
    Rng rng(dropout_seed);
    auto trace = net_forward(spec, params, x, /*train_mode=*/true, rng);
    return cross_entropy(trace.probs, labels);
}

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::string worst_param;  // "layer.weight[i]" style
};

// Compares net_backward against (L(p+eps)-L(p-eps))/(2 eps) for every
// parameter element.  Relative error uses max(1, |a|, |n|) as denominator.
inline GradCheckResult gradcheck_net(const NetSpec& spec, Params<double> params,
                                     const Tensor<double>& x,
                                     const std::vector<std::size_t>& labels, double eps = 1e-5,
                                     std::uint64_t dropout_seed = 42) {
    Rng rng(dropout_seed);
    auto trace = net_forward(spec, params, x, /*train_mode=*/true, rng);
    auto grads = net_backward(spec, params, trace, labels);

    GradCheckResult result;
    for (auto& [name, p] : params) {
        const auto& g = grads.at(name);
        auto check = [&](Tensor<double>& w, const Tensor<double>& gw, const char* field) {
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double orig = w[i];
                w[i] = orig + eps;
                double lp = gradcheck_loss(spec, params, x, labels, dropout_seed);
                w[i] = orig - eps;
                double lm = gradcheck_loss(spec, params, x, labels, dropout_seed);
                w[i] = orig;
                double numeric = (lp - lm) / (2.0 * eps);
                double analytic = gw[i];
                double rel = std::abs(analytic - numeric) /
                             std::max({1.0, std::abs(analytic), std::abs(numeric)});
                if (rel > result.max_rel_err) {
                    result.max_rel_err = rel;
                    result.worst_param = name + "." + field + "[" + std::to_string(i) + "]";
                }
            }
        };
        check(p.weight, g.weight, "weight");
        check(p.bias, g.bias, "bias");
    }
    return result;
}

namespace detail {

inline LayerSpec gc_layer(LayerKind kind, std::string name) {
    LayerSpec l;
    l.kind = kind;
    l.name = std::move(name);
    return l;
}

}  // namespace detail

// Three small nets covering every layer kind.
inline std::vector<NetSpec> gradcheck_specs() {
    using detail::gc_layer;
    std::vector<NetSpec> specs;
    {
        NetSpec s;  // conv2d + relu + maxpool2d path
        s.input_shape = {2, 4, 4};
        s.num_classes = 3;
        LayerSpec conv = gc_layer(LayerKind::Conv2d, "conv1");
        conv.out_channels = 3;
        conv.kernel = {2, 2};
        conv.stride = {1, 1};
        conv.padding = {0, 0};
        s.layers.push_back(conv);
        s.layers.push_back(gc_layer(LayerKind::Relu, "relu1"));
        LayerSpec pool = gc_layer(LayerKind::MaxPool2d, "pool1");
        pool.kernel = {2, 2};
        pool.stride = {1, 1};
        s.layers.push_back(pool);
        s.layers.push_back(gc_layer(LayerKind::Flatten, "flat"));
        LayerSpec fc = gc_layer(LayerKind::Fc, "fc1");
        fc.units = 3;
        s.layers.push_back(fc);
        s.layers.push_back(gc_layer(LayerKind::Softmax, "prob"));
        specs.push_back(s);
    }
    {
        NetSpec s;  // conv3d + relu + maxpool3d path
        s.input_shape = {1, 4, 4, 4};
        s.num_classes = 3;
        LayerSpec conv = gc_layer(LayerKind::Conv3d, "conv1");
        conv.out_channels = 2;
        conv.kernel = {2, 2, 2};
        conv.stride = {1, 1, 1};
        conv.padding = {0, 0, 0};
        s.layers.push_back(conv);
        s.layers.push_back(gc_layer(LayerKind::Relu, "relu1"));
        LayerSpec pool = gc_layer(LayerKind::MaxPool3d, "pool1");
        pool.kernel = {2, 2, 2};
        pool.stride = {1, 1, 1};
        s.layers.push_back(pool);
        s.layers.push_back(gc_layer(LayerKind::Flatten, "flat"));
        LayerSpec fc = gc_layer(LayerKind::Fc, "fc1");
        fc.units = 3;
        s.layers.push_back(fc);
        s.layers.push_back(gc_layer(LayerKind::Softmax, "prob"));
        specs.push_back(s);
    }
    {
        NetSpec s;  // fc + dropout path
        s.input_shape = {4, 1, 1};
        s.num_classes = 3;
        s.layers.push_back(gc_layer(LayerKind::Flatten, "flat"));
        LayerSpec fc1 = gc_layer(LayerKind::Fc, "fc1");
        fc1.units = 5;
        s.layers.push_back(fc1);
        s.layers.push_back(gc_layer(LayerKind::Relu, "relu1"));
        LayerSpec drop = gc_layer(LayerKind::Dropout, "drop1");
        drop.dropout_rate = 0.3;
        s.layers.push_back(drop);
        LayerSpec fc2 = gc_layer(LayerKind::Fc, "fc2");
        fc2.units = 3;
        s.layers.push_back(fc2);
        s.layers.push_back(gc_layer(LayerKind::Softmax, "prob"));
        specs.push_back(s);
    }
    return specs;
}

// Full suite over randomized inputs and weights.
inline GradCheckResult run_gradcheck_suite(std::uint64_t seed) {
    Rng rng(seed);
    GradCheckResult worst;
    for (const NetSpec& spec : gradcheck_specs()) {
        Params<double> params = init_params<double>(spec, rng);
        // nonzero biases so their gradients see a generic operating point
        for (auto& [name, p] : params)
            p.bias = rand_uniform<double>(rng, p.bias.shape(), -0.3, 0.3);
        Shape xshape = spec.input_shape;
        xshape.insert(xshape.begin(), 2);  // batch of 2
        Tensor<double> x = rand_uniform<double>(rng, xshape, -1.0, 1.0);
        std::vector<std::size_t> labels(2);
        for (auto& l : labels) l = rng.next_below(spec.num_classes);
        GradCheckResult r = gradcheck_net(spec, params, x, labels);
        if (r.max_rel_err > worst.max_rel_err) worst = r;
    }
    return worst;
}

}  // namespace stcw
