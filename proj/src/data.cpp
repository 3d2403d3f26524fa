#include "stcw/data.hpp"

namespace stcw {

DataTask task_from_name(const std::string& name) {
    if (name == "shapes2d") return DataTask::Shapes2d;
    if (name == "motion3d") return DataTask::Motion3d;
    throw ValidationError("unknown task '" + name + "' (expected shapes2d|motion3d)");
}

std::string task_name(DataTask task) {
    return task == DataTask::Shapes2d ? "shapes2d" : "motion3d";
}

void DatasetConfig::validate() const {
    if (samples_train == 0 || samples_test == 0)
        throw ValidationError("dataset: sample counts must be positive");
    if (noise_std < 0.0) throw ValidationError("dataset: noise_std must be >= 0");
    if (height < kPatternBox || width < kPatternBox)
        throw ValidationError("dataset: frame smaller than the 7x7 pattern box");
    if (task == DataTask::Shapes2d) {
        if (num_classes < 1 || num_classes > kNumPatterns)
            throw ValidationError("dataset: shapes2d num_classes must be in [1,4]");
    } else {
        if (num_classes != 2 && num_classes != 4)
            throw ValidationError("dataset: motion3d num_classes must be 2 or 4");
        if (clip_t < 8) throw ValidationError("dataset: motion3d clip length must be >= 8");
    }
}

const std::vector<std::pair<std::size_t, std::size_t>>& pattern_offsets(std::size_t id) {
    static const auto make = [] {
        std::vector<std::vector<std::pair<std::size_t, std::size_t>>> all(kNumPatterns);
        // 0: filled 5x5 square centered in the box
        for (std::size_t y = 1; y <= 5; ++y)
            for (std::size_t x = 1; x <= 5; ++x) all[0].push_back({y, x});
        // 1: disc of radius ~2.5 around (3,3)
        for (std::size_t y = 0; y < kPatternBox; ++y)
            for (std::size_t x = 0; x < kPatternBox; ++x) {
                long dy = static_cast<long>(y) - 3, dx = static_cast<long>(x) - 3;
                if (dy * dy + dx * dx <= 6) all[1].push_back({y, x});
            }
        // 2: plus cross through the center
        for (std::size_t i = 0; i < kPatternBox; ++i) {
            all[2].push_back({3, i});
            if (i != 3) all[2].push_back({i, 3});
        }
        // 3: thick main diagonal
        for (std::size_t i = 0; i < kPatternBox; ++i) {
            all[3].push_back({i, i});
            if (i + 1 < kPatternBox) all[3].push_back({i + 1, i});
        }
        return all;
    }();
    if (id >= kNumPatterns) throw ValidationError("pattern id out of range");
    return make[id];
}

}  // namespace stcw
