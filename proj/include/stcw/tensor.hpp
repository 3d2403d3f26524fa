#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace stcw {

// Thrown for contract violations (bad shapes, bad config values, bad files).
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& shape) {
    if (shape.empty()) throw ValidationError("tensor shape must have at least one dimension");
    std::size_t n = 1;
    for (std::size_t d : shape) {
        if (d == 0) throw ValidationError("tensor dimensions must be >= 1");
        n *= d;
    }
    return n;
}

inline std::string shape_str(const Shape& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

// Dense row-major N-d array. Channels-first ordering by convention:
// images (N,C,H,W), clips (N,C,T,H,W).
template <typename S>
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_numel(shape_), S(0)) {}
    Tensor(Shape shape, std::vector<S> data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (shape_numel(shape_) != data_.size())
            throw ValidationError("tensor data length does not match shape " + shape_str(shape_));
    }

    static Tensor zeros(const Shape& shape) { return Tensor(shape); }

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t size() const { return data_.size(); }

    const std::vector<S>& data() const { return data_; }
    std::vector<S>& data() { return data_; }
    S* raw() { return data_.data(); }
    const S* raw() const { return data_.data(); }

    S operator[](std::size_t i) const { return data_[i]; }
    S& operator[](std::size_t i) { return data_[i]; }

    // Flat offsets for the common ranks.
    std::size_t at4(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const {
        return ((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d;
    }
    std::size_t at5(std::size_t a, std::size_t b, std::size_t c, std::size_t d, std::size_t e) const {
        return (((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d) * shape_[4] + e;
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    template <typename U>
    Tensor<U> cast() const {
        std::vector<U> out(data_.size());
        for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
        return Tensor<U>(shape_, std::move(out));
    }

private:
    Shape shape_;
    std::vector<S> data_;
};

template <typename S>
Tensor<S> zeros(const Shape& shape) {
    return Tensor<S>(shape);
}

template <typename S>
Tensor<S> full(const Shape& shape, S value) {
    Tensor<S> t(shape);
    std::fill(t.data().begin(), t.data().end(), value);
    return t;
}

template <typename S>
Tensor<S> scale(const Tensor<S>& t, S a) {
    if (!std::isfinite(static_cast<double>(a))) throw ValidationError("scale factor must be finite");
    Tensor<S> out(t.shape());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = a * t[i];
    return out;
}

namespace detail {
template <typename S>
void require_same_shape(const Tensor<S>& a, const Tensor<S>& b, const char* op) {
    if (!a.same_shape(b))
        throw ValidationError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                              " vs " + shape_str(b.shape()));
}
}  // namespace detail

template <typename S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
    detail::require_same_shape(a, b, "add");
    Tensor<S> out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

template <typename S>
Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b) {
    detail::require_same_shape(a, b, "sub");
    Tensor<S> out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

template <typename S>
Tensor<S> elementwise_mul(const Tensor<S>& a, const Tensor<S>& b) {
    detail::require_same_shape(a, b, "elementwise_mul");
    Tensor<S> out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

// Reduction removes the axis.  sum_over_axis(ones([3,2,2]), 0) -> [[3,3],[3,3]].
template <typename S>
Tensor<S> sum_over_axis(const Tensor<S>& t, std::size_t axis) {
    if (axis >= t.rank()) throw ValidationError("sum_over_axis: axis out of range");
    if (t.rank() == 1) {
        S acc = 0;
        for (std::size_t i = 0; i < t.size(); ++i) acc += t[i];
        return Tensor<S>({1}, {acc});
    }
    Shape out_shape;
    for (std::size_t i = 0; i < t.rank(); ++i)
        if (i != axis) out_shape.push_back(t.dim(i));
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= t.dim(i);
    for (std::size_t i = axis + 1; i < t.rank(); ++i) inner *= t.dim(i);
    std::size_t n_axis = t.dim(axis);

    Tensor<S> out(out_shape);
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t k = 0; k < n_axis; ++k)
            for (std::size_t i = 0; i < inner; ++i)
                out[o * inner + i] += t[(o * n_axis + k) * inner + i];
    return out;
}

template <typename S>
double max_abs_diff(const Tensor<S>& a, const Tensor<S>& b) {
    detail::require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
    return m;
}

template <typename S>
double sum_all(const Tensor<S>& t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) acc += static_cast<double>(t[i]);
    return acc;
}

// Deterministic PRNG: xoshiro256++ seeded via splitmix64.  Fixed algorithm so
// that identical seeds give identical streams on every platform; never backed
// by std::random distributions (their output is implementation defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    // Independent child stream for a named purpose.
    Rng split(std::uint64_t purpose) const {
        std::uint64_t x = state_[0] ^ (purpose * 0x9E3779B97F4A7C15ULL);
        return Rng(splitmix64(x));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0,1), 53-bit resolution.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    double uniform(double lo, double hi) {
        if (!(lo < hi)) throw ValidationError("rand_uniform: requires lo < hi");
        return lo + (hi - lo) * next_unit();
    }

    // Box-Muller; the pair is consumed one value at a time.
    double normal(double mean, double std) {
        if (std < 0) throw ValidationError("rand_normal: requires std >= 0");
        if (have_spare_) {
            have_spare_ = false;
            return mean + std * spare_;
        }
        double u1 = next_unit(), u2 = next_unit();
        while (u1 <= 0.0) u1 = next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return mean + std * r * std::cos(a);
    }

private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    std::uint64_t state_[4] = {};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

template <typename S>
Tensor<S> rand_uniform(Rng& rng, const Shape& shape, double lo, double hi) {
    if (!(lo < hi)) throw ValidationError("rand_uniform: requires lo < hi");
    Tensor<S> t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<S>(rng.uniform(lo, hi));
    return t;
}

template <typename S>
Tensor<S> rand_normal(Rng& rng, const Shape& shape, double mean, double std) {
    if (std < 0) throw ValidationError("rand_normal: requires std >= 0");
    Tensor<S> t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<S>(rng.normal(mean, std));
    return t;
}

}  // namespace stcw
