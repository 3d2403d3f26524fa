#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "stcw/net.hpp"

namespace stcw {

// A tensor as stored in a checkpoint: dtype 0 = f32, dtype 1 = f64.
using AnyTensor = std::variant<Tensor<float>, Tensor<double>>;

struct Checkpoint {
    std::string spec_text;  // empty when the file carries no net spec
    std::vector<std::pair<std::string, AnyTensor>> tensors;  // write order preserved
};

// Binary container, all integers little-endian:
//   magic "STCW" | version u32 (=1) | spec_len u32 | spec UTF-8 bytes
//   | tensor_count u32 | per tensor:
//       name_len u32 | name UTF-8 | dtype u8 | rank u8 | dims u64[rank]
//       | raw row-major element data (little-endian)
// write is atomic: temp file in the same directory, then rename.
void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

// Model convenience wrappers: tensors named "<layer>.weight" / "<layer>.bias"
// in spec layer order; spec/params consistency is validated on both sides.
template <typename S>
void save_model(const std::string& path, const NetSpec& spec, const Params<S>& params) {
    check_params_match(spec, params);
    Checkpoint ckpt;
    ckpt.spec_text = serialize_spec(spec);
    for (const LayerSpec& layer : spec.layers) {
        if (!layer.has_params()) continue;
        const auto& p = params.at(layer.name);
        ckpt.tensors.emplace_back(layer.name + ".weight", p.weight);
        ckpt.tensors.emplace_back(layer.name + ".bias", p.bias);
    }
    write_checkpoint(path, ckpt);
}

template <typename S>
std::pair<NetSpec, Params<S>> load_model(const std::string& path) {
    Checkpoint ckpt = read_checkpoint(path);
    if (ckpt.spec_text.empty())
        throw ValidationError(path + ": checkpoint carries no net spec");
    NetSpec spec = parse_spec(ckpt.spec_text);
    Params<S> params;
    for (const auto& [name, any] : ckpt.tensors) {
        auto dot = name.rfind('.');
        if (dot == std::string::npos)
            throw ValidationError(path + ": unexpected tensor name '" + name + "'");
        std::string layer = name.substr(0, dot), field = name.substr(dot + 1);
        const Tensor<S>* t = std::get_if<Tensor<S>>(&any);
        if (!t) throw ValidationError(path + ": tensor '" + name + "' has unexpected dtype");
        if (field == "weight")
            params[layer].weight = *t;
        else if (field == "bias")
            params[layer].bias = *t;
        else
            throw ValidationError(path + ": unexpected tensor name '" + name + "'");
    }
    check_params_match(spec, params);
    return {std::move(spec), std::move(params)};
}

}  // namespace stcw
