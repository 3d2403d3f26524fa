#pragma once

#include <array>
#include <string>
#include <vector>

#include "stcw/tensor.hpp"

namespace stcw {

enum class LayerKind {
    Conv2d,
    Conv3d,
    MaxPool2d,
    MaxPool3d,
    Relu,
    Dropout,
    Flatten,
    Fc,
    Softmax,
};

std::string kind_name(LayerKind kind);
LayerKind kind_from_name(const std::string& name);

struct LayerSpec {
    LayerKind kind = LayerKind::Relu;
    std::string name;
    std::size_t out_channels = 0;           // conv2d/conv3d
    std::size_t units = 0;                  // fc
    std::vector<std::size_t> kernel;        // (kH,kW) or (kT,kH,kW); also pool window
    std::vector<std::size_t> stride;        // per axis, same arity as kernel
    std::vector<std::size_t> padding;       // per axis (conv only; pools are unpadded)
    double dropout_rate = 0.0;              // dropout

    bool is_conv() const { return kind == LayerKind::Conv2d || kind == LayerKind::Conv3d; }
    bool is_pool() const { return kind == LayerKind::MaxPool2d || kind == LayerKind::MaxPool3d; }
    bool has_params() const { return is_conv() || kind == LayerKind::Fc; }
};

// Ordered layer list plus input geometry.  input_shape excludes the batch
// axis: (C,H,W) for 2D nets, (C,T,H,W) for 3D nets.
struct NetSpec {
    std::vector<LayerSpec> layers;
    Shape input_shape;
    std::size_t num_classes = 0;

    bool is_3d() const { return input_shape.size() == 4; }
};

// Per-layer output shapes (excluding batch axis), index i = output of layer i.
// Throws ValidationError on any invalid geometry (non-integral output size,
// zero dims, fc/softmax placement violations).
std::vector<Shape> propagate_shapes(const NetSpec& spec);

// Full structural validation: shape propagation succeeds and the net ends
// with fc then softmax.
void validate_spec(const NetSpec& spec);

// Human-readable text form stored inside checkpoints: one layer per line,
// key=value pairs.  parse(serialize(s)) reproduces s exactly.
std::string serialize_spec(const NetSpec& spec);
NetSpec parse_spec(const std::string& text);

// Desk-scale 2D reference net: conv(8,3x3) relu pool conv(16,3x3) relu pool
// flatten fc(64) relu dropout fc(K) softmax.
NetSpec reference_net_2d(std::size_t in_channels, std::size_t h, std::size_t w,
                         std::size_t num_classes, double dropout_rate);

}  // namespace stcw
