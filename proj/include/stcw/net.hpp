#pragma once

#include <map>
#include <string>

#include "stcw/layers.hpp"
#include "stcw/net_spec.hpp"
#include "stcw/tensor.hpp"

namespace stcw {

template <typename S>
struct ParamPair {
    Tensor<S> weight;
    Tensor<S> bias;
};

// Named parameters for every conv/fc layer of a NetSpec.
template <typename S>
using Params = std::map<std::string, ParamPair<S>>;

template <typename S>
Shape param_weight_shape(const LayerSpec& layer, const Shape& in_shape) {
    switch (layer.kind) {
        case LayerKind::Conv2d:
            return {layer.out_channels, in_shape[0], layer.kernel[0], layer.kernel[1]};
        case LayerKind::Conv3d:
            return {layer.out_channels, in_shape[0], layer.kernel[0], layer.kernel[1], layer.kernel[2]};
        case LayerKind::Fc:
            return {layer.units, in_shape[0]};
        default:
            throw ValidationError("layer " + layer.name + " has no parameters");
    }
}

// Uniform in +-1/sqrt(fan_in) for weights, zero biases.
template <typename S>
Params<S> init_params(const NetSpec& spec, Rng& rng) {
    validate_spec(spec);
    auto shapes = propagate_shapes(spec);
    Params<S> params;
    Shape in = spec.input_shape;
    for (std::size_t li = 0; li < spec.layers.size(); ++li) {
        const LayerSpec& layer = spec.layers[li];
        if (layer.has_params()) {
            Shape ws = param_weight_shape<S>(layer, in);
            std::size_t fan_in = 1;
            for (std::size_t i = 1; i < ws.size(); ++i) fan_in *= ws[i];
            double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
            ParamPair<S> p;
            p.weight = rand_uniform<S>(rng, ws, -bound, bound);
            p.bias = zeros<S>({ws[0]});
            params[layer.name] = std::move(p);
        }
        in = shapes[li];
    }
    return params;
}

template <typename S>
void check_params_match(const NetSpec& spec, const Params<S>& params) {
    auto shapes = propagate_shapes(spec);
    Shape in = spec.input_shape;
    std::size_t expected = 0;
    for (std::size_t li = 0; li < spec.layers.size(); ++li) {
        const LayerSpec& layer = spec.layers[li];
        if (layer.has_params()) {
            ++expected;
            auto it = params.find(layer.name);
            if (it == params.end())
                throw ValidationError("params missing layer '" + layer.name + "'");
            Shape ws = param_weight_shape<S>(layer, in);
            if (it->second.weight.shape() != ws)
                throw ValidationError("layer " + layer.name + ": weight shape " +
                                      shape_str(it->second.weight.shape()) + " expected " +
                                      shape_str(ws));
            if (it->second.bias.shape() != Shape{ws[0]})
                throw ValidationError("layer " + layer.name + ": bias shape mismatch");
        }
        in = shapes[li];
    }
    if (params.size() != expected) throw ValidationError("params contain unknown layer entries");
}

// Everything the backward pass needs from a forward pass.
template <typename S>
struct ForwardTrace {
    std::vector<Tensor<S>> inputs;                 // input to each layer
    Tensor<S> probs;                               // softmax output
    std::vector<std::vector<std::size_t>> argmax;  // per layer, pools only
    std::vector<std::vector<S>> masks;             // per layer, dropout only
};

template <typename S>
Tensor<S> reshape(const Tensor<S>& t, const Shape& shape) {
    return Tensor<S>(shape, t.data());
}

namespace detail {
inline Conv2dGeom geom2d(const LayerSpec& l) {
    return {l.stride[0], l.stride[1], l.padding[0], l.padding[1]};
}
inline Conv3dGeom geom3d(const LayerSpec& l) {
    return {l.stride[0], l.stride[1], l.stride[2], l.padding[0], l.padding[1], l.padding[2]};
}
}  // namespace detail

// Runs the net on a batch (leading batch axis prepended to spec.input_shape).
// rng is consumed only by dropout in train mode.
template <typename S>
ForwardTrace<S> net_forward(const NetSpec& spec, const Params<S>& params, const Tensor<S>& x,
                            bool train_mode, Rng& rng) {
    if (x.rank() != spec.input_shape.size() + 1)
        throw ValidationError("net_forward: batch rank mismatch");
    for (std::size_t i = 0; i < spec.input_shape.size(); ++i)
        if (x.dim(i + 1) != spec.input_shape[i])
            throw ValidationError("net_forward: input shape " + shape_str(x.shape()) +
                                  " does not match spec input " + shape_str(spec.input_shape));
    const std::size_t n = x.dim(0);
    ForwardTrace<S> trace;
    trace.argmax.resize(spec.layers.size());
    trace.masks.resize(spec.layers.size());
    Tensor<S> cur = x;
    for (std::size_t li = 0; li < spec.layers.size(); ++li) {
        const LayerSpec& layer = spec.layers[li];
        trace.inputs.push_back(cur);
        switch (layer.kind) {
            case LayerKind::Conv2d: {
                const auto& p = params.at(layer.name);
                cur = conv2d_forward(cur, p.weight, p.bias, detail::geom2d(layer));
                break;
            }
            case LayerKind::Conv3d: {
                const auto& p = params.at(layer.name);
                cur = conv3d_forward(cur, p.weight, p.bias, detail::geom3d(layer));
                break;
            }
            case LayerKind::MaxPool2d:
                cur = maxpool2d_forward(cur, layer.kernel[0], layer.kernel[1], layer.stride[0],
                                        layer.stride[1], &trace.argmax[li]);
                break;
            case LayerKind::MaxPool3d:
                cur = maxpool3d_forward(cur, layer.kernel[0], layer.kernel[1], layer.kernel[2],
                                        layer.stride[0], layer.stride[1], layer.stride[2],
                                        &trace.argmax[li]);
                break;
            case LayerKind::Relu:
                cur = relu_forward(cur);
                break;
            case LayerKind::Dropout:
                cur = dropout_forward(cur, layer.dropout_rate, rng, train_mode, &trace.masks[li]);
                break;
            case LayerKind::Flatten:
                cur = reshape(cur, {n, cur.size() / n});
                break;
            case LayerKind::Fc: {
                const auto& p = params.at(layer.name);
                cur = fc_forward(cur, p.weight, p.bias);
                break;
            }
            case LayerKind::Softmax:
                cur = softmax_forward(cur);
                break;
        }
    }
    trace.probs = cur;
    return trace;
}

template <typename S>
using Grads = Params<S>;

// Gradients of mean cross-entropy w.r.t. every parameter.
template <typename S>
Grads<S> net_backward(const NetSpec& spec, const Params<S>& params, const ForwardTrace<S>& trace,
                      const std::vector<std::size_t>& labels) {
    Grads<S> grads;
    Tensor<S> d = cross_entropy_backward(trace.probs, labels);
    for (std::size_t li = spec.layers.size(); li-- > 0;) {
        const LayerSpec& layer = spec.layers[li];
        const Tensor<S>& in = trace.inputs[li];
        switch (layer.kind) {
            case LayerKind::Softmax:
                d = softmax_backward(trace.probs, d);
                break;
            case LayerKind::Fc: {
                const auto& p = params.at(layer.name);
                Tensor<S> dx, dw, db;
                fc_backward(in, p.weight, d, dx, dw, db);
                grads[layer.name] = {std::move(dw), std::move(db)};
                d = std::move(dx);
                break;
            }
            case LayerKind::Flatten:
                d = reshape(d, in.shape());
                break;
            case LayerKind::Dropout:
                d = dropout_backward(trace.masks[li], d);
                break;
            case LayerKind::Relu:
                d = relu_backward(in, d);
                break;
            case LayerKind::MaxPool2d:
            case LayerKind::MaxPool3d:
                d = maxpool_backward<S>(in.shape(), trace.argmax[li], d);
                break;
            case LayerKind::Conv2d: {
                const auto& p = params.at(layer.name);
                Tensor<S> dx, dw, db;
                conv2d_backward(in, p.weight, detail::geom2d(layer), d, dx, dw, db);
                grads[layer.name] = {std::move(dw), std::move(db)};
                d = std::move(dx);
                break;
            }
            case LayerKind::Conv3d: {
                const auto& p = params.at(layer.name);
                Tensor<S> dx, dw, db;
                conv3d_backward(in, p.weight, detail::geom3d(layer), d, dx, dw, db);
                grads[layer.name] = {std::move(dw), std::move(db)};
                d = std::move(dx);
                break;
            }
        }
    }
    return grads;
}

}  // namespace stcw
