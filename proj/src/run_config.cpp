#include "stcw/run_config.hpp"

#include <fstream>
#include <limits>
#include <sstream>

namespace stcw {

namespace {

std::size_t parse_size(const std::string& v, const std::string& key) {
    if (key == "conv_freeze_iters" && v == "inf") return std::numeric_limits<std::size_t>::max();
    try {
        std::size_t pos = 0;
        unsigned long long n = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
        throw ValidationError("config: bad integer for " + key + ": '" + v + "'");
    }
}

double parse_real(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ValidationError("config: bad number for " + key + ": '" + v + "'");
    }
}

}  // namespace

DatasetConfig RunConfig::dataset_config() const {
    DatasetConfig d;
    d.task = task;
    d.num_classes = num_classes;
    d.samples_train = samples_train;
    d.samples_test = samples_test;
    d.height = h;
    d.width = w;
    d.clip_t = t;
    d.noise_std = noise_std;
    d.seed = seed;
    return d;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig c;
    c.learning_rate = lr;
    c.momentum = momentum;
    c.iterations = iterations;
    c.batch_size = batch_size;
    c.conv_freeze_iters = conv_freeze_iters;
    c.weight_decay = weight_decay;
    c.seed = seed;
    return c;
}

void RunConfig::validate() const {
    dataset_config().validate();
    train_config().validate();
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw ValidationError("config: dropout_rate must be in [0,1)");
    if (inflate_t0 < 1) throw ValidationError("config: inflate_t0 must be >= 1");
    if (pool_t < 1) throw ValidationError("config: pool_t must be >= 1");
    if (fc_units < 1) throw ValidationError("config: fc_units must be >= 1");
}

RunConfig parse_run_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        // trim
        auto b = line.find_first_not_of(" \t\r");
        auto e = line.find_last_not_of(" \t\r");
        if (b == std::string::npos) continue;
        line = line.substr(b, e - b + 1);
        auto eq = line.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ValidationError("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(0, eq), value = line.substr(eq + 1);

        if (key == "task") cfg.task = task_from_name(value);
        else if (key == "num_classes") cfg.num_classes = parse_size(value, key);
        else if (key == "h") cfg.h = parse_size(value, key);
        else if (key == "w") cfg.w = parse_size(value, key);
        else if (key == "t") cfg.t = parse_size(value, key);
        else if (key == "noise_std") cfg.noise_std = parse_real(value, key);
        else if (key == "samples_train") cfg.samples_train = parse_size(value, key);
        else if (key == "samples_test") cfg.samples_test = parse_size(value, key);
        else if (key == "lr") cfg.lr = parse_real(value, key);
        else if (key == "momentum") cfg.momentum = parse_real(value, key);
        else if (key == "weight_decay") cfg.weight_decay = parse_real(value, key);
        else if (key == "iterations") cfg.iterations = parse_size(value, key);
        else if (key == "batch_size") cfg.batch_size = parse_size(value, key);
        else if (key == "conv_freeze_iters") cfg.conv_freeze_iters = parse_size(value, key);
        else if (key == "dropout_rate") cfg.dropout_rate = parse_real(value, key);
        else if (key == "seed") cfg.seed = parse_size(value, key);
        else if (key == "inflate_method") cfg.inflate_method = method_from_name(value);
        else if (key == "inflate_t0") cfg.inflate_t0 = parse_size(value, key);
        else if (key == "pool_t") cfg.pool_t = parse_size(value, key);
        else if (key == "fc_units") cfg.fc_units = parse_size(value, key);
        else throw ValidationError("config: unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path + ": cannot open config file");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_run_config_text(text);
}

}  // namespace stcw
