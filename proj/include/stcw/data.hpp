#pragma once

#include "stcw/train.hpp"

namespace stcw {

enum class DataTask { Shapes2d, Motion3d };

DataTask task_from_name(const std::string& name);
std::string task_name(DataTask task);

struct DatasetConfig {
    DataTask task = DataTask::Shapes2d;
    std::size_t num_classes = 4;
    std::size_t samples_train = 512;
    std::size_t samples_test = 500;
    std::size_t height = 16;
    std::size_t width = 16;
    std::size_t clip_t = 8;  // motion3d only
    double noise_std = 0.05;
    std::uint64_t seed = 0;

    void validate() const;
};

// Pattern stamps live in a 7x7 box: square, disc, cross, diagonal bar.
inline constexpr std::size_t kPatternBox = 7;
inline constexpr std::size_t kNumPatterns = 4;

// Offsets (dy,dx) of the lit pixels of pattern id in [0,4).
const std::vector<std::pair<std::size_t, std::size_t>>& pattern_offsets(std::size_t id);

// Renders one noise-free clip: pattern translating at (vy,vx) pixels/frame
// with toroidal wrap-around, starting at (y0,x0).  Output (1,T,H,W).
template <typename S>
Tensor<S> render_clip(std::size_t pattern_id, std::size_t y0, std::size_t x0, int vy, int vx,
                      std::size_t t, std::size_t h, std::size_t w) {
    Tensor<S> clip({1, t, h, w});
    const auto& offsets = pattern_offsets(pattern_id);
    for (std::size_t ti = 0; ti < t; ++ti) {
        long py = static_cast<long>(y0) + vy * static_cast<long>(ti);
        long px = static_cast<long>(x0) + vx * static_cast<long>(ti);
        for (const auto& [dy, dx] : offsets) {
            std::size_t y = static_cast<std::size_t>(((py + static_cast<long>(dy)) %
                                                      static_cast<long>(h) + static_cast<long>(h)) %
                                                     static_cast<long>(h));
            std::size_t x = static_cast<std::size_t>(((px + static_cast<long>(dx)) %
                                                      static_cast<long>(w) + static_cast<long>(w)) %
                                                     static_cast<long>(w));
            clip[(ti * h + y) * w + x] = S(1);
        }
    }
    return clip;
}

namespace detail {
template <typename S>
void add_noise_clamped(Tensor<S>& t, double noise_std, Rng& rng) {
    if (noise_std == 0.0) {
        for (std::size_t i = 0; i < t.size(); ++i)
            t[i] = std::clamp(t[i], S(0), S(1));
        return;
    }
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = std::clamp(static_cast<S>(t[i] + static_cast<S>(rng.normal(0.0, noise_std))), S(0),
                          S(1));
}
}  // namespace detail

// K classes of static patterns at uniform random positions with Gaussian
// pixel noise.  Labels are balanced round-robin.  Images (N,1,H,W).
template <typename S>
Batch<S> gen_shapes2d_split(const DatasetConfig& cfg, std::size_t count, Rng rng) {
    if (cfg.height < kPatternBox || cfg.width < kPatternBox)
        throw ValidationError("gen_shapes2d: pattern larger than frame");
    if (cfg.num_classes < 1 || cfg.num_classes > kNumPatterns)
        throw ValidationError("gen_shapes2d: num_classes must be in [1,4]");
    Batch<S> batch;
    batch.x = Tensor<S>({count, 1, cfg.height, cfg.width});
    batch.labels.resize(count);
    const std::size_t frame = cfg.height * cfg.width;
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t label = i % cfg.num_classes;
        std::size_t y0 = rng.next_below(cfg.height - kPatternBox + 1);
        std::size_t x0 = rng.next_below(cfg.width - kPatternBox + 1);
        Tensor<S> img = render_clip<S>(label, y0, x0, 0, 0, 1, cfg.height, cfg.width);
        detail::add_noise_clamped(img, cfg.noise_std, rng);
        std::copy(img.data().begin(), img.data().end(), batch.x.data().begin() + i * frame);
        batch.labels[i] = label;
    }
    return batch;
}

// Clips of a random pattern translating 1 pixel/frame with wrap-around; the
// class is the motion direction.  Pattern identity and start position are
// uniform and class-independent, so a single frame carries no class signal.
template <typename S>
Batch<S> gen_motion3d_split(const DatasetConfig& cfg, std::size_t count, Rng rng) {
    if (cfg.num_classes != 2 && cfg.num_classes != 4)
        throw ValidationError("gen_motion3d: num_classes must be 2 or 4");
    if (cfg.clip_t < 8) throw ValidationError("gen_motion3d: clip length must be >= 8");
    if (cfg.height < kPatternBox || cfg.width < kPatternBox)
        throw ValidationError("gen_motion3d: pattern larger than frame");
    // direction per class: up, down, left, right (first two for K=2: left/right)
    static const int kVy4[] = {-1, 1, 0, 0};
    static const int kVx4[] = {0, 0, -1, 1};
    static const int kVy2[] = {0, 0};
    static const int kVx2[] = {-1, 1};
    const int* vy = cfg.num_classes == 4 ? kVy4 : kVy2;
    const int* vx = cfg.num_classes == 4 ? kVx4 : kVx2;

    Batch<S> batch;
    batch.x = Tensor<S>({count, 1, cfg.clip_t, cfg.height, cfg.width});
    batch.labels.resize(count);
    const std::size_t item = cfg.clip_t * cfg.height * cfg.width;
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t label = i % cfg.num_classes;
        std::size_t pattern = rng.next_below(kNumPatterns);
        std::size_t y0 = rng.next_below(cfg.height);
        std::size_t x0 = rng.next_below(cfg.width);
        Tensor<S> clip = render_clip<S>(pattern, y0, x0, vy[label], vx[label], cfg.clip_t,
                                        cfg.height, cfg.width);
        detail::add_noise_clamped(clip, cfg.noise_std, rng);
        std::copy(clip.data().begin(), clip.data().end(), batch.x.data().begin() + i * item);
        batch.labels[i] = label;
    }
    return batch;
}

// Train/test from disjoint seed streams.
template <typename S>
std::pair<Batch<S>, Batch<S>> gen_dataset(const DatasetConfig& cfg) {
    cfg.validate();
    Rng base(cfg.seed);
    if (cfg.task == DataTask::Shapes2d)
        return {gen_shapes2d_split<S>(cfg, cfg.samples_train, base.split(10)),
                gen_shapes2d_split<S>(cfg, cfg.samples_test, base.split(11))};
    return {gen_motion3d_split<S>(cfg, cfg.samples_train, base.split(10)),
            gen_motion3d_split<S>(cfg, cfg.samples_test, base.split(11))};
}

// Middle frame (floor(T/2)) of each clip, labels unchanged: the frame-only
// baseline input.
template <typename S>
Batch<S> frames_of(const Batch<S>& clips) {
    if (clips.x.rank() != 5) throw ValidationError("frames_of: expected (N,C,T,H,W) clips");
    const std::size_t n = clips.x.dim(0), c = clips.x.dim(1), t = clips.x.dim(2),
                      h = clips.x.dim(3), w = clips.x.dim(4);
    const std::size_t mid = t / 2;
    Batch<S> out;
    out.x = Tensor<S>({n, c, h, w});
    out.labels = clips.labels;
    for (std::size_t ni = 0; ni < n; ++ni)
        for (std::size_t ci = 0; ci < c; ++ci)
            std::copy(clips.x.data().begin() + ((ni * c + ci) * t + mid) * h * w,
                      clips.x.data().begin() + ((ni * c + ci) * t + mid + 1) * h * w,
                      out.x.data().begin() + (ni * c + ci) * h * w);
    return out;
}

}  // namespace stcw
