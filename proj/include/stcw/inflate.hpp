#pragma once

#include <optional>
#include <sstream>

#include "stcw/net.hpp"

namespace stcw {

// The four temporal initialization schemes for 2D->3D weight inflation.
enum class InflateMethod { IA, IS, ZWI, NWI };

std::string method_name(InflateMethod m);
InflateMethod method_from_name(const std::string& name);

// Coefficient form of an inflation: w3d slice t = alphas[t] * w2d.
// All profiles satisfy sum(alphas) == 1, which preserves the layer's output
// on temporally constant input.
struct AlphaProfile {
    InflateMethod method = InflateMethod::IA;
    std::size_t temporal_size = 1;  // T
    std::vector<double> alphas;     // length T
    std::size_t positive_index = 1; // t0, 1-based; the dominant slice for ZWI/NWI

    void validate() const;
};

// IA: 1/T everywhere.  IS: tuned presets (1/4,1/2,1/4) for T=3 and (1/2,1/2)
// for T=2, otherwise normalized i.i.d. exponentials from rng.  ZWI: 1 at t0,
// 0 elsewhere.  NWI: (2T-1)/T at t0, -1/T elsewhere.
AlphaProfile make_alphas(InflateMethod method, std::size_t temporal_size, std::size_t t0 = 1,
                         Rng* rng = nullptr);

// (O,C,kH,kW) -> (O,C,T,kH,kW); bias is copied verbatim.
template <typename S>
std::pair<Tensor<S>, Tensor<S>> inflate_conv(const Tensor<S>& w2d, const Tensor<S>& b2d,
                                             const AlphaProfile& profile) {
    profile.validate();
    if (w2d.rank() != 4) throw ValidationError("inflate_conv: weight must be (O,C,kH,kW)");
    const std::size_t o = w2d.dim(0), c = w2d.dim(1), kh = w2d.dim(2), kw = w2d.dim(3);
    const std::size_t t_size = profile.temporal_size;
    Tensor<S> w3d({o, c, t_size, kh, kw});
    const std::size_t plane = kh * kw;
    for (std::size_t oc = 0; oc < o * c; ++oc)
        for (std::size_t t = 0; t < t_size; ++t) {
            const S a = static_cast<S>(profile.alphas[t]);
            for (std::size_t p = 0; p < plane; ++p)
                w3d[(oc * t_size + t) * plane + p] = a * w2d[oc * plane + p];
        }
    return {std::move(w3d), b2d};
}

// max |sum_t w3d[:,:,t,:,:] - w2d|; the constraint every scheme must satisfy
// at initialization time.
template <typename S>
double verify_sum_constraint(const Tensor<S>& w2d, const Tensor<S>& w3d) {
    if (w2d.rank() != 4 || w3d.rank() != 5)
        throw ValidationError("verify_sum_constraint: expected 4-d and 5-d weights");
    if (w3d.dim(0) != w2d.dim(0) || w3d.dim(1) != w2d.dim(1) || w3d.dim(3) != w2d.dim(2) ||
        w3d.dim(4) != w2d.dim(3))
        throw ValidationError("verify_sum_constraint: shape mismatch");
    return max_abs_diff(sum_over_axis(w3d, 2), w2d);
}

// Feeds a temporally constant clip (T_in = kT, every frame identical) through
// the inflated layer and the original 2D layer; returns the max deviation of
// the single temporal output over random trials.
template <typename S>
double verify_equivalence(const Tensor<S>& w2d, const Tensor<S>& b2d, const Tensor<S>& w3d,
                          const Tensor<S>& b3d, Rng& rng, std::size_t trials,
                          std::size_t frame_h = 6, std::size_t frame_w = 6) {
    const std::size_t c = w2d.dim(1), kt = w3d.dim(2);
    if (frame_h < w2d.dim(2) || frame_w < w2d.dim(3))
        throw ValidationError("verify_equivalence: frame smaller than kernel");
    double worst = 0.0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        Tensor<S> frame = rand_uniform<S>(rng, {1, c, frame_h, frame_w}, -1.0, 1.0);
        Tensor<S> clip({1, c, kt, frame_h, frame_w});
        for (std::size_t ci = 0; ci < c; ++ci)
            for (std::size_t t = 0; t < kt; ++t)
                std::copy(frame.data().begin() + ci * frame_h * frame_w,
                          frame.data().begin() + (ci + 1) * frame_h * frame_w,
                          clip.data().begin() + (ci * kt + t) * frame_h * frame_w);
        Tensor<S> out2d = conv2d_forward(frame, w2d, b2d, Conv2dGeom{1, 1, 0, 0});
        Tensor<S> out3d = conv3d_forward(clip, w3d, b3d, Conv3dGeom{1, 1, 1, 0, 0, 0});
        // out3d has a single temporal slice; compare it against out2d
        worst = std::max(worst, max_abs_diff(out2d, Tensor<S>(out2d.shape(), out3d.data())));
    }
    return worst;
}

// Mean cosine similarity over temporal slice pairs of a (O,C,kT,kH,kW)
// kernel, each slice flattened across (O,C,kH,kW).  Pairs involving a zero
// slice contribute 0.
template <typename S>
double temporal_slice_similarity(const Tensor<S>& w3d) {
    if (w3d.rank() != 5) throw ValidationError("temporal_slice_similarity: weight must be 5-d");
    const std::size_t kt = w3d.dim(2);
    if (kt < 2) throw ValidationError("temporal_slice_similarity: needs kT >= 2");
    const std::size_t oc = w3d.dim(0) * w3d.dim(1), plane = w3d.dim(3) * w3d.dim(4);
    auto slice = [&](std::size_t t) {
        std::vector<double> v(oc * plane);
        for (std::size_t i = 0; i < oc; ++i)
            for (std::size_t p = 0; p < plane; ++p)
                v[i * plane + p] = static_cast<double>(w3d[(i * kt + t) * plane + p]);
        return v;
    };
    double acc = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < kt; ++a) {
        auto va = slice(a);
        for (std::size_t b = a + 1; b < kt; ++b) {
            auto vb = slice(b);
            double dot = 0, na = 0, nb = 0;
            for (std::size_t i = 0; i < va.size(); ++i) {
                dot += va[i] * vb[i];
                na += va[i] * va[i];
                nb += vb[i] * vb[i];
            }
            acc += (na == 0.0 || nb == 0.0) ? 0.0 : dot / std::sqrt(na * nb);
            ++pairs;
        }
    }
    return acc / static_cast<double>(pairs);
}

struct ConvInflationPlan {
    InflateMethod method = InflateMethod::IA;
    std::size_t temporal_size = 1;
    std::size_t t0 = 1;
};

struct LayerInflationRecord {
    std::string layer;
    InflateMethod method;
    std::size_t temporal_size;
    std::vector<double> alphas;
    double residual;  // verify_sum_constraint on the fresh output
};

struct InflationReport {
    std::vector<LayerInflationRecord> conv_layers;
    std::vector<std::string> reinitialized_layers;  // FC layers rebuilt from rng

    std::string to_text() const;
};

struct InflateOptions {
    std::size_t clip_t = 8;      // temporal size of the 3D net's input
    std::size_t pool_t = 2;      // temporal window/stride for inflated pools
    std::size_t fc_units = 64;   // hidden FC width after re-initialization
};

// Turns a trained 2D net into a 3D net: conv2d layers become conv3d with the
// planned temporal size (temporal stride 1, padding 0), pools gain a temporal
// window, and FC layers are re-initialized (their flattened input no longer
// matches).  plan must cover every conv layer.
template <typename S>
std::tuple<NetSpec, Params<S>, InflationReport> inflate_net(
    const NetSpec& spec2d, const Params<S>& params2d,
    const std::map<std::string, ConvInflationPlan>& plan, Rng& rng,
    const InflateOptions& opt = {}) {
    validate_spec(spec2d);
    check_params_match(spec2d, params2d);
    if (spec2d.is_3d()) throw ValidationError("inflate_net: input spec is already 3D");

    NetSpec spec3d;
    spec3d.num_classes = spec2d.num_classes;
    spec3d.input_shape = {spec2d.input_shape[0], opt.clip_t, spec2d.input_shape[1],
                          spec2d.input_shape[2]};

    InflationReport report;
    Params<S> params3d;

    for (const LayerSpec& layer : spec2d.layers) {
        LayerSpec out = layer;
        switch (layer.kind) {
            case LayerKind::Conv2d: {
                auto it = plan.find(layer.name);
                if (it == plan.end())
                    throw ValidationError("inflate_net: plan missing conv layer '" + layer.name + "'");
                const ConvInflationPlan& p = it->second;
                out.kind = LayerKind::Conv3d;
                out.kernel = {p.temporal_size, layer.kernel[0], layer.kernel[1]};
                out.stride = {1, layer.stride[0], layer.stride[1]};
                out.padding = {0, layer.padding[0], layer.padding[1]};

                AlphaProfile profile = make_alphas(p.method, p.temporal_size, p.t0, &rng);
                const auto& src = params2d.at(layer.name);
                auto [w3d, b3d] = inflate_conv(src.weight, src.bias, profile);
                double residual = verify_sum_constraint(src.weight, w3d);
                report.conv_layers.push_back(
                    {layer.name, p.method, p.temporal_size, profile.alphas, residual});
                params3d[layer.name] = {std::move(w3d), std::move(b3d)};
                break;
            }
            case LayerKind::MaxPool2d:
                out.kind = LayerKind::MaxPool3d;
                out.kernel = {opt.pool_t, layer.kernel[0], layer.kernel[1]};
                out.stride = {opt.pool_t, layer.stride[0], layer.stride[1]};
                break;
            case LayerKind::Fc:
                // Re-initialized below once input shapes are known.
                if (layer.units != spec2d.num_classes) out.units = opt.fc_units;
                report.reinitialized_layers.push_back(layer.name);
                break;
            default:
                break;
        }
        spec3d.layers.push_back(out);
    }

    // Shape-check the 3D net (throws if the clip is too short), then rebuild
    // the FC parameters at their new fan-in.
    auto shapes = propagate_shapes(spec3d);
    Shape in = spec3d.input_shape;
    for (std::size_t li = 0; li < spec3d.layers.size(); ++li) {
        const LayerSpec& layer = spec3d.layers[li];
        if (layer.kind == LayerKind::Fc) {
            Shape ws = param_weight_shape<S>(layer, in);
            double bound = 1.0 / std::sqrt(static_cast<double>(ws[1]));
            params3d[layer.name] = {rand_uniform<S>(rng, ws, -bound, bound), zeros<S>({ws[0]})};
        }
        in = shapes[li];
    }
    validate_spec(spec3d);
    check_params_match(spec3d, params3d);
    return {std::move(spec3d), std::move(params3d), std::move(report)};
}

// Default plan matching the reference architecture: first conv gets temporal
// size 3, every later conv gets 2.
std::map<std::string, ConvInflationPlan> default_plan(const NetSpec& spec2d, InflateMethod method,
                                                      std::size_t t0);

}  // namespace stcw
