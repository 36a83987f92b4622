#pragma once

#include "alina/pipeline.hpp"

#include <filesystem>
#include <string>

namespace alina
{

struct EvalConfig
{
    int tau = 1;
    double sigma = 0.33;
};

struct Config
{
    PipelineConfig pipeline;
    EvalConfig eval;
};

// Line-oriented `key = value` file; values are JSON literals
// (`hsv.lower = [0,70,170]`, `traversal.disk_mode = false`). `#` starts a
// comment. Unknown keys throw Errc::invalid_argument.
Config load_config(const std::filesystem::path &path);
Config parse_config(const std::string &text);

// Applies one `key=value` override on top of a config.
void apply_setting(Config &cfg, const std::string &key, const std::string &value_text);

} // namespace alina
