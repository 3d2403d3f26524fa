#pragma once

#include "stcw/tensor.hpp"

namespace stcw {

// Late fusion: unweighted elementwise mean of (N,K) probability tensors.
template <typename S>
Tensor<S> fuse_probs(const std::vector<Tensor<S>>& probs) {
    if (probs.empty()) throw ValidationError("fuse: needs at least one probability tensor");
    for (const auto& p : probs) {
        if (p.rank() != 2) throw ValidationError("fuse: probability tensors must be (N,K)");
        if (!p.same_shape(probs[0])) throw ValidationError("fuse: probability shape mismatch");
    }
    Tensor<S> out = probs[0];
    for (std::size_t i = 1; i < probs.size(); ++i)
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += probs[i][j];
    const S inv = static_cast<S>(1.0 / static_cast<double>(probs.size()));
    for (std::size_t j = 0; j < out.size(); ++j) out[j] *= inv;
    return out;
}

// Argmax accuracy with lowest-index tie-break.
template <typename S>
double argmax_accuracy(const Tensor<S>& probs, const std::vector<std::size_t>& labels) {
    if (probs.rank() != 2) throw ValidationError("accuracy: probs must be (N,K)");
    const std::size_t n = probs.dim(0), k = probs.dim(1);
    if (labels.size() != n) throw ValidationError("accuracy: label count mismatch");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < k; ++j)
            if (probs[i * k + j] > probs[i * k + best]) best = j;
        if (labels[i] >= k) throw ValidationError("accuracy: label out of range");
        if (best == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

}  // namespace stcw
