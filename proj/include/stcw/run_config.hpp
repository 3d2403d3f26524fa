#pragma once

#include "stcw/data.hpp"
#include "stcw/inflate.hpp"
#include "stcw/train.hpp"

namespace stcw {

// Plain-text key=value run configuration shared by the CLI commands.
// Unknown keys are rejected.
struct RunConfig {
    DataTask task = DataTask::Shapes2d;
    std::size_t num_classes = 4;
    std::size_t h = 16;
    std::size_t w = 16;
    std::size_t t = 8;
    double noise_std = 0.05;
    std::size_t samples_train = 512;
    std::size_t samples_test = 500;
    double lr = 0.02;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    std::size_t iterations = 300;
    std::size_t batch_size = 16;
    std::size_t conv_freeze_iters = 50;  // "inf" in the file freezes convs forever
    double dropout_rate = 0.5;
    std::uint64_t seed = 0;
    InflateMethod inflate_method = InflateMethod::NWI;
    std::size_t inflate_t0 = 1;
    std::size_t pool_t = 2;
    std::size_t fc_units = 64;

    DatasetConfig dataset_config() const;
    TrainConfig train_config() const;
    void validate() const;
};

RunConfig parse_run_config_text(const std::string& text);
RunConfig load_run_config(const std::string& path);

}  // namespace stcw
