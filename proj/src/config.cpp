#include "alina/config.hpp"

#include "alina/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace alina
{

namespace
{

std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string &key, const std::string &why)
{
    throw Error(Errc::invalid_argument, "config " + key + ": " + why);
}

int as_int(const std::string &key, const nlohmann::json &v)
{
    if (!v.is_number_integer())
        bad(key, "expected an integer");
    return v.get<int>();
}

std::array<std::uint8_t, 3> as_triple(const std::string &key, const nlohmann::json &v)
{
    if (!v.is_array() || v.size() != 3)
        bad(key, "expected [a,b,c]");
    std::array<std::uint8_t, 3> out{};
    for (std::size_t i = 0; i < 3; ++i)
    {
        if (!v[i].is_number_integer() || v[i].get<int>() < 0 || v[i].get<int>() > 255)
            bad(key, "components must be integers in [0,255]");
        out[i] = static_cast<std::uint8_t>(v[i].get<int>());
    }
    return out;
}

std::string as_string(const std::string &key, const nlohmann::json &v)
{
    if (!v.is_string())
        bad(key, "expected a string");
    return v.get<std::string>();
}

void apply_json(Config &cfg, const std::string &key, const nlohmann::json &v)
{
    auto &p = cfg.pipeline;
    if (key == "hsv.lower")
    {
        const auto t = as_triple(key, v);
        p.hsv.lower = {t[0], t[1], t[2]};
    }
    else if (key == "hsv.upper")
    {
        const auto t = as_triple(key, v);
        p.hsv.upper = {t[0], t[1], t[2]};
    }
    else if (key == "detect.threshold")
        p.threshold = as_int(key, v);
    else if (key == "detect.seed_group_gap")
        p.seed_group_gap = as_int(key, v);
    else if (key == "traversal.theta")
        p.traversal.theta = as_int(key, v);
    else if (key == "traversal.disk_mode")
    {
        if (!v.is_boolean())
            bad(key, "expected true or false");
        p.traversal.disk_mode = v.get<bool>();
    }
    else if (key == "geometry.sampling")
    {
        const auto s = as_string(key, v);
        if (s == "bilinear")
            p.sampling = Sampling::bilinear;
        else if (s == "nearest")
            p.sampling = Sampling::nearest;
        else
            bad(key, "expected \"bilinear\" or \"nearest\"");
    }
    else if (key == "roi.dst_width")
        p.dst_width = as_int(key, v);
    else if (key == "roi.dst_height")
        p.dst_height = as_int(key, v);
    else if (key == "pipeline.roi")
        p.roi_path = as_string(key, v);
    else if (key == "pipeline.out")
        p.output_dir = as_string(key, v);
    else if (key == "pipeline.overlay_color")
    {
        const auto t = as_triple(key, v);
        p.overlay_color = {t[0], t[1], t[2]};
    }
    else if (key == "eval.tau")
        cfg.eval.tau = as_int(key, v);
    else if (key == "eval.sigma")
    {
        if (!v.is_number())
            bad(key, "expected a number");
        cfg.eval.sigma = v.get<double>();
    }
    else
        throw Error(Errc::invalid_argument, "unknown config key: " + key);

    if (p.threshold < 0 || p.seed_group_gap < 0 || p.traversal.theta < 1 || p.dst_width < 0 || p.dst_height < 0 ||
        cfg.eval.tau < 0)
        bad(key, "value out of range");
    if (!p.hsv.valid())
        bad(key, "HSV lower bound exceeds upper bound");
}

nlohmann::json parse_value(const std::string &key, const std::string &text)
{
    try
    {
        return nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::exception &)
    {
        // Bare words are taken as strings so `geometry.sampling = nearest` works.
        if (!text.empty() && text.find_first_of("[]{}\",") == std::string::npos)
            return text;
        bad(key, "cannot parse value '" + text + "'");
    }
}

} // namespace

void apply_setting(Config &cfg, const std::string &key, const std::string &value_text)
{
    const std::string k = trim(key);
    apply_json(cfg, k, parse_value(k, trim(value_text)));
}

Config parse_config(const std::string &text)
{
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(Errc::invalid_argument, "config line " + std::to_string(lineno) + ": expected key = value");
        apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
    }
    return cfg;
}

Config load_config(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::not_found, "cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace alina
