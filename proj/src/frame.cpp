#include "alina/frame.hpp"

#include "alina/error.hpp"
#include "alina/image_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

namespace alina
{

namespace fs = std::filesystem;

Frame::Frame(int width, int height, int index)
    : width_(width), height_(height), index_(index), data_(static_cast<std::size_t>(width) * height * 3, 0)
{
    if (width < 0 || height < 0)
        throw Error(Errc::invalid_argument, "negative frame dimensions");
}

Frame::Frame(int width, int height, std::vector<std::uint8_t> rgb, int index)
    : width_(width), height_(height), index_(index), data_(std::move(rgb))
{
    if (width < 0 || height < 0)
        throw Error(Errc::invalid_argument, "negative frame dimensions");
    if (data_.size() != static_cast<std::size_t>(width) * height * 3)
        throw Error(Errc::invalid_argument, "frame data length does not match dimensions");
}

static void check_index(const Frame &f, int row, int col)
{
    if (row < 0 || col < 0 || row >= f.height() || col >= f.width())
    {
        throw Error(Errc::out_of_bounds, "pixel (" + std::to_string(row) + "," + std::to_string(col) +
                                             ") outside " + std::to_string(f.height()) + "x" +
                                             std::to_string(f.width()) + " frame");
    }
}

Rgb get_pixel(const Frame &f, int row, int col)
{
    check_index(f, row, col);
    return f.at(col, row);
}

void set_pixel(Frame &f, int row, int col, Rgb value)
{
    check_index(f, row, col);
    f.set(col, row, value);
}

std::array<Point, 4> Roi::dst_corners() const
{
    const double w = dst_width - 1;
    const double h = dst_height - 1;
    return {Point{0, 0}, Point{w, 0}, Point{w, h}, Point{0, h}};
}

static double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

Roi make_roi(const std::array<Point, 4> &src)
{
    Roi roi;
    roi.src = src;
    const auto &[tl, tr, br, bl] = src;
    roi.dst_width = static_cast<int>(std::floor(std::max(dist(tr, tl), dist(br, bl)) + 0.5));
    roi.dst_height = static_cast<int>(std::floor(std::max(dist(bl, tl), dist(br, tr)) + 0.5));
    return roi;
}

std::optional<RoiViolation> validate_roi(const Roi &roi, Dims dims)
{
    for (const auto &p : roi.src)
    {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            return RoiViolation{RoiViolationKind::not_finite, "non-finite vertex"};
    }
    for (std::size_t k = 0; k < 4; ++k)
    {
        const auto &p = roi.src[k];
        if (p.x < 0 || p.y < 0 || p.x > dims.width - 1 || p.y > dims.height - 1)
        {
            std::ostringstream os;
            os << "vertex out of bounds: vertex " << k << " (" << p.x << "," << p.y << ") outside " << dims.width
               << "x" << dims.height;
            return RoiViolation{RoiViolationKind::out_of_bounds, os.str()};
        }
    }
    if (roi.dst_width < 2 || roi.dst_height < 2)
        return RoiViolation{RoiViolationKind::dst_too_small, "destination rectangle must be at least 2x2"};

    // Turn direction at every vertex; y grows downward, so TL->TR->BR->BL
    // turns are all positive.
    double scale = 0;
    for (const auto &p : roi.src)
        scale = std::max({scale, std::abs(p.x), std::abs(p.y), 1.0});
    const double eps = 1e-9 * scale * scale;
    int positive = 0;
    int negative = 0;
    for (std::size_t k = 0; k < 4; ++k)
    {
        const Point a = roi.src[k];
        const Point b = roi.src[(k + 1) % 4];
        const Point c = roi.src[(k + 2) % 4];
        const double cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
        if (std::abs(cross) <= eps)
            return RoiViolation{RoiViolationKind::degenerate, "degenerate trapezoid: three collinear vertices"};
        (cross > 0 ? positive : negative)++;
    }
    if (positive != 4 && negative != 4)
        return RoiViolation{RoiViolationKind::non_convex, "non-convex or self-intersecting trapezoid"};

    const auto &[tl, tr, br, bl] = roi.src;
    if (negative == 4 || !(tl.x < tr.x && bl.x < br.x && tl.y < bl.y && tr.y < br.y))
    {
        return RoiViolation{RoiViolationKind::vertex_order,
                            "vertex order must be top-left, top-right, bottom-right, bottom-left"};
    }
    return std::nullopt;
}

Roi roi_from_json_text(const std::string &text)
{
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::exception &e)
    {
        throw Error(Errc::invalid_argument, std::string("ROI JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("src") || !j["src"].is_array() || j["src"].size() != 4)
        throw Error(Errc::invalid_argument, "ROI JSON needs \"src\" with exactly 4 [x,y] vertices");

    std::array<Point, 4> src;
    for (std::size_t k = 0; k < 4; ++k)
    {
        const auto &v = j["src"][k];
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            throw Error(Errc::invalid_argument, "ROI vertex " + std::to_string(k) + " is not an [x,y] pair");
        src[k] = {v[0].get<double>(), v[1].get<double>()};
    }
    Roi roi = make_roi(src);
    auto read_dim = [&](const char *key, int &out) {
        if (!j.contains(key))
            return;
        if (!j[key].is_number_integer())
            throw Error(Errc::invalid_argument, std::string("ROI \"") + key + "\" must be an integer");
        out = j[key].get<int>();
    };
    read_dim("dst_width", roi.dst_width);
    read_dim("dst_height", roi.dst_height);
    return roi;
}

static nlohmann::json number_json(double v)
{
    if (std::floor(v) == v && std::abs(v) < 1e15)
        return static_cast<long long>(v);
    return v;
}

std::string roi_to_json_text(const Roi &roi)
{
    nlohmann::json j;
    j["src"] = nlohmann::json::array();
    for (const auto &p : roi.src)
        j["src"].push_back({number_json(p.x), number_json(p.y)});
    j["dst_width"] = roi.dst_width;
    j["dst_height"] = roi.dst_height;
    return j.dump();
}

static std::string read_text(const fs::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::not_found, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Roi load_roi(const fs::path &path) { return roi_from_json_text(read_text(path)); }

void save_roi(const Roi &roi, const fs::path &path)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(Errc::io_failed, "cannot write " + path.string());
    out << roi_to_json_text(roi) << '\n';
}

FrameSequence::FrameSequence(std::string id, fs::path dir, std::vector<fs::path> files, Dims dims)
    : id_(std::move(id)), dir_(std::move(dir)), files_(std::move(files)), dims_(dims)
{
}

const fs::path &FrameSequence::frame_path(int index) const
{
    if (index < 0 || index >= frame_count())
        throw Error(Errc::out_of_bounds, "frame index " + std::to_string(index) + " out of range");
    return files_[static_cast<std::size_t>(index)];
}

Frame FrameSequence::frame(int index) const
{
    Frame f = read_frame(frame_path(index));
    if (f.width() != dims_.width || f.height() != dims_.height)
        throw Error(Errc::dimension_mismatch, "dimension mismatch at index " + std::to_string(index));
    f.set_index(index);
    return f;
}

std::string frame_file_name(int index, const std::string &ext)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "frame_%06d.%s", index, ext.c_str());
    return buf;
}

FrameSequence load_sequence(const fs::path &dir, std::optional<std::string> id)
{
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        throw Error(Errc::not_found, "sequence directory not found: " + dir.string());

    static const std::regex name_re(R"(frame_(\d{6,})\.(png|ppm))");
    std::map<int, fs::path> by_index;
    for (const auto &entry : fs::directory_iterator(dir))
    {
        if (!entry.is_regular_file())
            continue;
        std::smatch m;
        const std::string name = entry.path().filename().string();
        if (!std::regex_match(name, m, name_re))
            continue;
        const int index = std::stoi(m[1].str());
        if (!by_index.emplace(index, entry.path()).second)
            throw Error(Errc::invalid_argument, "duplicate frame index " + std::to_string(index));
    }
    if (by_index.empty())
        throw Error(Errc::no_frames, "no frames found in " + dir.string());

    std::vector<fs::path> files;
    files.reserve(by_index.size());
    Dims dims;
    int expected = 0;
    for (const auto &[index, path] : by_index)
    {
        if (index != expected)
            throw Error(Errc::invalid_argument, "missing frame index " + std::to_string(expected));
        Dims d;
        try
        {
            d = read_dims(path);
        }
        catch (const Error &e)
        {
            throw Error(Errc::decode_failed, "undecodable frame at index " + std::to_string(index) + ": " + e.what());
        }
        if (index == 0)
            dims = d;
        else if (d != dims)
            throw Error(Errc::dimension_mismatch, "dimension mismatch at index " + std::to_string(index));
        files.push_back(path);
        ++expected;
    }

    std::string seq_id = id ? *id : fs::absolute(dir).lexically_normal().filename().string();
    if (seq_id.empty())
        seq_id = fs::absolute(dir).lexically_normal().parent_path().filename().string();
    return FrameSequence(std::move(seq_id), dir, std::move(files), dims);
}

} // namespace alina
