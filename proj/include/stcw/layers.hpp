#pragma once

#include <limits>

#include "stcw/tensor.hpp"

namespace stcw {

// All convolutions are cross-correlation (no kernel flip), the convention the
// reference architectures assume.

struct Conv2dGeom {
    std::size_t stride_h = 1, stride_w = 1;
    std::size_t pad_h = 0, pad_w = 0;
};

struct Conv3dGeom {
    std::size_t stride_t = 1, stride_h = 1, stride_w = 1;
    std::size_t pad_t = 0, pad_h = 0, pad_w = 0;
};

namespace detail {
inline std::size_t out_dim(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad,
                           const char* axis) {
    std::size_t padded = in + 2 * pad;
    if (padded < k || (padded - k) % stride != 0)
        throw ValidationError(std::string("conv/pool: non-integral output size along ") + axis);
    return (padded - k) / stride + 1;
}
}  // namespace detail

// x (N,C,H,W), w (O,C,kH,kW), b (O) -> (N,O,H',W')
template <typename S>
Tensor<S> conv2d_forward(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b,
                         const Conv2dGeom& g) {
    if (x.rank() != 4 || w.rank() != 4) throw ValidationError("conv2d: x must be 4-d, w must be 4-d");
    if (x.dim(1) != w.dim(1)) throw ValidationError("conv2d: channel mismatch");
    if (b.rank() != 1 || b.dim(0) != w.dim(0)) throw ValidationError("conv2d: bias shape mismatch");
    const std::size_t n = x.dim(0), c_in = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const std::size_t o_ch = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    const std::size_t oh = detail::out_dim(h, kh, g.stride_h, g.pad_h, "H");
    const std::size_t ow = detail::out_dim(wd, kw, g.stride_w, g.pad_w, "W");

    Tensor<S> out({n, o_ch, oh, ow});
    for (std::size_t ni = 0; ni < n; ++ni)
        for (std::size_t o = 0; o < o_ch; ++o)
            for (std::size_t i = 0; i < oh; ++i)
                for (std::size_t j = 0; j < ow; ++j) {
                    S acc = b[o];
                    for (std::size_t c = 0; c < c_in; ++c)
                        for (std::size_t u = 0; u < kh; ++u) {
                            std::size_t yi = i * g.stride_h + u;
                            if (yi < g.pad_h || yi >= h + g.pad_h) continue;
                            for (std::size_t v = 0; v < kw; ++v) {
                                std::size_t xj = j * g.stride_w + v;
                                if (xj < g.pad_w || xj >= wd + g.pad_w) continue;
                                acc += w[w.at4(o, c, u, v)] * x[x.at4(ni, c, yi - g.pad_h, xj - g.pad_w)];
                            }
                        }
                    out[out.at4(ni, o, i, j)] = acc;
                }
    return out;
}

template <typename S>
void conv2d_backward(const Tensor<S>& x, const Tensor<S>& w, const Conv2dGeom& g,
                     const Tensor<S>& dout, Tensor<S>& dx, Tensor<S>& dw, Tensor<S>& db) {
    const std::size_t n = x.dim(0), c_in = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const std::size_t o_ch = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    const std::size_t oh = dout.dim(2), ow = dout.dim(3);
    dx = zeros<S>(x.shape());
    dw = zeros<S>(w.shape());
    db = zeros<S>({o_ch});
    for (std::size_t ni = 0; ni < n; ++ni)
        for (std::size_t o = 0; o < o_ch; ++o)
            for (std::size_t i = 0; i < oh; ++i)
                for (std::size_t j = 0; j < ow; ++j) {
                    const S go = dout[dout.at4(ni, o, i, j)];
                    db[o] += go;
                    for (std::size_t c = 0; c < c_in; ++c)
                        for (std::size_t u = 0; u < kh; ++u) {
                            std::size_t yi = i * g.stride_h + u;
                            if (yi < g.pad_h || yi >= h + g.pad_h) continue;
                            for (std::size_t v = 0; v < kw; ++v) {
                                std::size_t xj = j * g.stride_w + v;
                                if (xj < g.pad_w || xj >= wd + g.pad_w) continue;
                                std::size_t xi = x.at4(ni, c, yi - g.pad_h, xj - g.pad_w);
                                dw[w.at4(o, c, u, v)] += go * x[xi];
                                dx[xi] += go * w[w.at4(o, c, u, v)];
                            }
                        }
                }
}

// x (N,C,T,H,W), w (O,C,kT,kH,kW), b (O) -> (N,O,T',H',W')
template <typename S>
Tensor<S> conv3d_forward(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b,
                         const Conv3dGeom& g) {
    if (x.rank() != 5 || w.rank() != 5) throw ValidationError("conv3d: x must be 5-d, w must be 5-d");
    if (x.dim(1) != w.dim(1)) throw ValidationError("conv3d: channel mismatch");
    if (b.rank() != 1 || b.dim(0) != w.dim(0)) throw ValidationError("conv3d: bias shape mismatch");
    const std::size_t n = x.dim(0), c_in = x.dim(1), t = x.dim(2), h = x.dim(3), wd = x.dim(4);
    const std::size_t o_ch = w.dim(0), kt = w.dim(2), kh = w.dim(3), kw = w.dim(4);
    const std::size_t ot = detail::out_dim(t, kt, g.stride_t, g.pad_t, "T");
    const std::size_t oh = detail::out_dim(h, kh, g.stride_h, g.pad_h, "H");
    const std::size_t ow = detail::out_dim(wd, kw, g.stride_w, g.pad_w, "W");

    Tensor<S> out({n, o_ch, ot, oh, ow});
    for (std::size_t ni = 0; ni < n; ++ni)
        for (std::size_t o = 0; o < o_ch; ++o)
            for (std::size_t ti = 0; ti < ot; ++ti)
                for (std::size_t i = 0; i < oh; ++i)
                    for (std::size_t j = 0; j < ow; ++j) {
                        S acc = b[o];
                        for (std::size_t c = 0; c < c_in; ++c)
                            for (std::size_t tau = 0; tau < kt; ++tau) {
                                std::size_t zt = ti * g.stride_t + tau;
                                if (zt < g.pad_t || zt >= t + g.pad_t) continue;
                                for (std::size_t u = 0; u < kh; ++u) {
                                    std::size_t yi = i * g.stride_h + u;
                                    if (yi < g.pad_h || yi >= h + g.pad_h) continue;
                                    for (std::size_t v = 0; v < kw; ++v) {
                                        std::size_t xj = j * g.stride_w + v;
                                        if (xj < g.pad_w || xj >= wd + g.pad_w) continue;
                                        acc += w[w.at5(o, c, tau, u, v)] *
                                               x[x.at5(ni, c, zt - g.pad_t, yi - g.pad_h, xj - g.pad_w)];
                                    }
                                }
                            }
                        out[out.at5(ni, o, ti, i, j)] = acc;
                    }
    return out;
}

template <typename S>
void conv3d_backward(const Tensor<S>& x, const Tensor<S>& w, const Conv3dGeom& g,
                     const Tensor<S>& dout, Tensor<S>& dx, Tensor<S>& dw, Tensor<S>& db) {
    const std::size_t n = x.dim(0), c_in = x.dim(1), t = x.dim(2), h = x.dim(3), wd = x.dim(4);
    const std::size_t o_ch = w.dim(0), kt = w.dim(2), kh = w.dim(3), kw = w.dim(4);
    const std::size_t ot = dout.dim(2), oh = dout.dim(3), ow = dout.dim(4);
    dx = zeros<S>(x.shape());
    dw = zeros<S>(w.shape());
    db = zeros<S>({o_ch});
    for (std::size_t ni = 0; ni < n; ++ni)
        for (std::size_t o = 0; o < o_ch; ++o)
            for (std::size_t ti = 0; ti < ot; ++ti)
                for (std::size_t i = 0; i < oh; ++i)
                    for (std::size_t j = 0; j < ow; ++j) {
                        const S go = dout[dout.at5(ni, o, ti, i, j)];
                        db[o] += go;
                        for (std::size_t c = 0; c < c_in; ++c)
                            for (std::size_t tau = 0; tau < kt; ++tau) {
                                std::size_t zt = ti * g.stride_t + tau;
                                if (zt < g.pad_t || zt >= t + g.pad_t) continue;
                                for (std::size_t u = 0; u < kh; ++u) {
                                    std::size_t yi = i * g.stride_h + u;
                                    if (yi < g.pad_h || yi >= h + g.pad_h) continue;
                                    for (std::size_t v = 0; v < kw; ++v) {
                                        std::size_t xj = j * g.stride_w + v;
                                        if (xj < g.pad_w || xj >= wd + g.pad_w) continue;
                                        std::size_t xi =
                                            x.at5(ni, c, zt - g.pad_t, yi - g.pad_h, xj - g.pad_w);
                                        dw[w.at5(o, c, tau, u, v)] += go * x[xi];
                                        dx[xi] += go * w[w.at5(o, c, tau, u, v)];
                                    }
                                }
                            }
                    }
}

// Max pooling caches the flat input index of each window maximum; scan order
// is row-major, strict > comparison, so ties break to the first index and the
// backward pass is deterministic.
template <typename S>
Tensor<S> maxpool2d_forward(const Tensor<S>& x, std::size_t win_h, std::size_t win_w,
                            std::size_t stride_h, std::size_t stride_w,
                            std::vector<std::size_t>* argmax = nullptr) {
    if (x.rank() != 4) throw ValidationError("maxpool2d: x must be 4-d");
    const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const std::size_t oh = detail::out_dim(h, win_h, stride_h, 0, "H");
    const std::size_t ow = detail::out_dim(w, win_w, stride_w, 0, "W");
    Tensor<S> out({n, c, oh, ow});
    if (argmax) argmax->assign(out.size(), 0);
    for (std::size_t ni = 0; ni < n; ++ni)
        for (std::size_t ci = 0; ci < c; ++ci)
            for (std::size_t i = 0; i < oh; ++i)
                for (std::size_t j = 0; j < ow; ++j) {
                    S best = -std::numeric_limits<S>::infinity();
                    std::size_t best_idx = 0;
                    for (std::size_t u = 0; u < win_h; ++u)
                        for (std::size_t v = 0; v < win_w; ++v) {
                            std::size_t idx = x.at4(ni, ci, i * stride_h + u, j * stride_w + v);
                            if (x[idx] > best) {
                                best = x[idx];
                                best_idx = idx;
                            }
                        }
                    std::size_t oi = out.at4(ni, ci, i, j);
                    out[oi] = best;
                    if (argmax) (*argmax)[oi] = best_idx;
                }
    return out;
}

template <typename S>
Tensor<S> maxpool3d_forward(const Tensor<S>& x, std::size_t win_t, std::size_t win_h,
                            std::size_t win_w, std::size_t stride_t, std::size_t stride_h,
                            std::size_t stride_w, std::vector<std::size_t>* argmax = nullptr) {
    if (x.rank() != 5) throw ValidationError("maxpool3d: x must be 5-d");
    const std::size_t n = x.dim(0), c = x.dim(1), t = x.dim(2), h = x.dim(3), w = x.dim(4);
    const std::size_t ot = detail::out_dim(t, win_t, stride_t, 0, "T");
    const std::size_t oh = detail::out_dim(h, win_h, stride_h, 0, "H");
    const std::size_t ow = detail::out_dim(w, win_w, stride_w, 0, "W");
    Tensor<S> out({n, c, ot, oh, ow});
    if (argmax) argmax->assign(out.size(), 0);
    for (std::size_t ni = 0; ni < n; ++ni)
        for (std::size_t ci = 0; ci < c; ++ci)
            for (std::size_t ti = 0; ti < ot; ++ti)
                for (std::size_t i = 0; i < oh; ++i)
                    for (std::size_t j = 0; j < ow; ++j) {
                        S best = -std::numeric_limits<S>::infinity();
                        std::size_t best_idx = 0;
                        for (std::size_t q = 0; q < win_t; ++q)
                            for (std::size_t u = 0; u < win_h; ++u)
                                for (std::size_t v = 0; v < win_w; ++v) {
                                    std::size_t idx = x.at5(ni, ci, ti * stride_t + q,
                                                            i * stride_h + u, j * stride_w + v);
                                    if (x[idx] > best) {
                                        best = x[idx];
                                        best_idx = idx;
                                    }
                                }
                        std::size_t oi = out.at5(ni, ci, ti, i, j);
                        out[oi] = best;
                        if (argmax) (*argmax)[oi] = best_idx;
                    }
    return out;
}

template <typename S>
Tensor<S> maxpool_backward(const Shape& in_shape, const std::vector<std::size_t>& argmax,
                           const Tensor<S>& dout) {
    Tensor<S> dx = zeros<S>(in_shape);
    for (std::size_t i = 0; i < dout.size(); ++i) dx[argmax[i]] += dout[i];
    return dx;
}

template <typename S>
Tensor<S> relu_forward(const Tensor<S>& x) {
    Tensor<S> out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > S(0) ? x[i] : S(0);
    return out;
}

template <typename S>
Tensor<S> relu_backward(const Tensor<S>& x, const Tensor<S>& dout) {
    Tensor<S> dx(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > S(0) ? dout[i] : S(0);
    return dx;
}

// Inverted dropout: kept units scaled by 1/(1-rate) in train mode so eval
// mode is the bitwise identity.
template <typename S>
Tensor<S> dropout_forward(const Tensor<S>& x, double rate, Rng& rng, bool train_mode,
                          std::vector<S>* mask = nullptr) {
    if (rate < 0.0 || rate >= 1.0) throw ValidationError("dropout: rate must be in [0,1)");
    if (!train_mode || rate == 0.0) {
        if (mask) mask->assign(x.size(), S(1));
        return x;
    }
    const S keep_scale = static_cast<S>(1.0 / (1.0 - rate));
    Tensor<S> out(x.shape());
    if (mask) mask->assign(x.size(), S(0));
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (rng.next_unit() >= rate) {
            out[i] = x[i] * keep_scale;
            if (mask) (*mask)[i] = keep_scale;
        }
    }
    return out;
}

template <typename S>
Tensor<S> dropout_backward(const std::vector<S>& mask, const Tensor<S>& dout) {
    Tensor<S> dx(dout.shape());
    for (std::size_t i = 0; i < dout.size(); ++i) dx[i] = dout[i] * mask[i];
    return dx;
}

// x (N, inputs), w (units, inputs), b (units) -> (N, units)
template <typename S>
Tensor<S> fc_forward(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b) {
    if (x.rank() != 2 || w.rank() != 2) throw ValidationError("fc: x and w must be 2-d");
    if (x.dim(1) != w.dim(1)) throw ValidationError("fc: input size mismatch");
    const std::size_t n = x.dim(0), units = w.dim(0), in = w.dim(1);
    Tensor<S> out({n, units});
    for (std::size_t ni = 0; ni < n; ++ni)
        for (std::size_t u = 0; u < units; ++u) {
            S acc = b[u];
            for (std::size_t k = 0; k < in; ++k) acc += w[u * in + k] * x[ni * in + k];
            out[ni * units + u] = acc;
        }
    return out;
}

template <typename S>
void fc_backward(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& dout, Tensor<S>& dx,
                 Tensor<S>& dw, Tensor<S>& db) {
    const std::size_t n = x.dim(0), units = w.dim(0), in = w.dim(1);
    dx = zeros<S>(x.shape());
    dw = zeros<S>(w.shape());
    db = zeros<S>({units});
    for (std::size_t ni = 0; ni < n; ++ni)
        for (std::size_t u = 0; u < units; ++u) {
            const S go = dout[ni * units + u];
            db[u] += go;
            for (std::size_t k = 0; k < in; ++k) {
                dw[u * in + k] += go * x[ni * in + k];
                dx[ni * in + k] += go * w[u * in + k];
            }
        }
}

// Row softmax with max subtraction.  x (N,K).
template <typename S>
Tensor<S> softmax_forward(const Tensor<S>& x) {
    if (x.rank() != 2) throw ValidationError("softmax: x must be (N, classes)");
    const std::size_t n = x.dim(0), k = x.dim(1);
    Tensor<S> out(x.shape());
    for (std::size_t ni = 0; ni < n; ++ni) {
        S row_max = x[ni * k];
        for (std::size_t j = 1; j < k; ++j) row_max = std::max(row_max, x[ni * k + j]);
        S denom = 0;
        for (std::size_t j = 0; j < k; ++j) {
            S e = std::exp(x[ni * k + j] - row_max);
            out[ni * k + j] = e;
            denom += e;
        }
        for (std::size_t j = 0; j < k; ++j) out[ni * k + j] /= denom;
    }
    return out;
}

// Full Jacobian-vector product: dz_j = p_j * (dp_j - sum_i dp_i p_i).
template <typename S>
Tensor<S> softmax_backward(const Tensor<S>& probs, const Tensor<S>& dout) {
    const std::size_t n = probs.dim(0), k = probs.dim(1);
    Tensor<S> dx(probs.shape());
    for (std::size_t ni = 0; ni < n; ++ni) {
        S dot = 0;
        for (std::size_t j = 0; j < k; ++j) dot += dout[ni * k + j] * probs[ni * k + j];
        for (std::size_t j = 0; j < k; ++j)
            dx[ni * k + j] = probs[ni * k + j] * (dout[ni * k + j] - dot);
    }
    return dx;
}

inline constexpr double kProbFloor = 1e-12;

// Mean of -log(probs[n, label_n]) with probability floor kProbFloor.
template <typename S>
double cross_entropy(const Tensor<S>& probs, const std::vector<std::size_t>& labels) {
    if (probs.rank() != 2) throw ValidationError("cross_entropy: probs must be (N, classes)");
    const std::size_t n = probs.dim(0), k = probs.dim(1);
    if (labels.size() != n) throw ValidationError("cross_entropy: label count mismatch");
    double acc = 0.0;
    for (std::size_t ni = 0; ni < n; ++ni) {
        if (labels[ni] >= k) throw ValidationError("cross_entropy: label out of range");
        double row_sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) row_sum += static_cast<double>(probs[ni * k + j]);
        if (std::abs(row_sum - 1.0) > 1e-5)
            throw ValidationError("cross_entropy: probability row does not sum to 1");
        acc += -std::log(std::max(static_cast<double>(probs[ni * k + labels[ni]]), kProbFloor));
    }
    return acc / static_cast<double>(n);
}

// d(mean CE)/dprobs; zero where the floor is active.
template <typename S>
Tensor<S> cross_entropy_backward(const Tensor<S>& probs, const std::vector<std::size_t>& labels) {
    const std::size_t n = probs.dim(0), k = probs.dim(1);
    Tensor<S> dp = zeros<S>(probs.shape());
    for (std::size_t ni = 0; ni < n; ++ni) {
        double p = static_cast<double>(probs[ni * k + labels[ni]]);
        if (p > kProbFloor)
            dp[ni * k + labels[ni]] = static_cast<S>(-1.0 / (p * static_cast<double>(n)));
    }
    return dp;
}

}  // namespace stcw
