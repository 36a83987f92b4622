#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace alina
{

struct Rgb
{
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb &, const Rgb &) = default;
};

// H x W x 3 raster. Row i, column j, channel k lives at data[(i*W + j)*3 + k],
// which is the A[i,j,k] = I[i,j,k] array model: loading copies bytes verbatim.
class Frame
{
public:
    Frame() = default;
    Frame(int width, int height, int index = 0);
    Frame(int width, int height, std::vector<std::uint8_t> rgb, int index = 0);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int index() const noexcept { return index_; }
    void set_index(int index) noexcept { index_ = index; }
    bool empty() const noexcept { return data_.empty(); }

    // Unchecked access; x is the column, y the row.
    Rgb at(int x, int y) const noexcept
    {
        const std::size_t o = (static_cast<std::size_t>(y) * width_ + x) * 3;
        return {data_[o], data_[o + 1], data_[o + 2]};
    }
    void set(int x, int y, Rgb c) noexcept
    {
        const std::size_t o = (static_cast<std::size_t>(y) * width_ + x) * 3;
        data_[o] = c.r;
        data_[o + 1] = c.g;
        data_[o + 2] = c.b;
    }

    const std::vector<std::uint8_t> &bytes() const noexcept { return data_; }
    std::vector<std::uint8_t> &bytes() noexcept { return data_; }

    friend bool operator==(const Frame &a, const Frame &b)
    {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    int index_ = 0;
    std::vector<std::uint8_t> data_;
};

// Checked read by (row, col). Throws Errc::out_of_bounds.
Rgb get_pixel(const Frame &f, int row, int col);
void set_pixel(Frame &f, int row, int col, Rgb value);

struct Point
{
    double x = 0.0; ///< column
    double y = 0.0; ///< row

    friend bool operator==(const Point &, const Point &) = default;
};

struct Dims
{
    int width = 0;
    int height = 0;

    friend bool operator==(const Dims &, const Dims &) = default;
};

// Trapezoidal region of interest. Vertices are ordered top-left, top-right,
// bottom-right, bottom-left; the destination rectangle spans
// (0,0)..(dst_width-1, dst_height-1).
struct Roi
{
    std::array<Point, 4> src;
    int dst_width = 0;
    int dst_height = 0;

    std::array<Point, 4> dst_corners() const;

    friend bool operator==(const Roi &, const Roi &) = default;
};

// Builds a Roi whose destination rectangle keeps the trapezoid's longest
// horizontal and vertical edge lengths.
Roi make_roi(const std::array<Point, 4> &src);

enum class RoiViolationKind
{
    out_of_bounds,
    degenerate,
    non_convex,
    vertex_order,
    dst_too_small,
    not_finite,
};

struct RoiViolation
{
    RoiViolationKind kind;
    std::string message;
};

// Returns nullopt when the Roi is usable on a frame of the given size.
std::optional<RoiViolation> validate_roi(const Roi &roi, Dims dims);

Roi roi_from_json_text(const std::string &text);
std::string roi_to_json_text(const Roi &roi);
Roi load_roi(const std::filesystem::path &path);
void save_roi(const Roi &roi, const std::filesystem::path &path);

// Ordered, dimension-homogeneous list of frames on disk. Frames are decoded on
// demand so long sequences do not sit in memory.
class FrameSequence
{
public:
    FrameSequence() = default;
    FrameSequence(std::string id, std::filesystem::path dir, std::vector<std::filesystem::path> files, Dims dims);

    const std::string &id() const noexcept { return id_; }
    const std::filesystem::path &source_dir() const noexcept { return dir_; }
    int frame_count() const noexcept { return static_cast<int>(files_.size()); }
    Dims frame_dims() const noexcept { return dims_; }
    const std::filesystem::path &frame_path(int index) const;

    Frame frame(int index) const;

private:
    std::string id_;
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> files_;
    Dims dims_;
};

// Scans `dir` for frame_%06d.png / frame_%06d.ppm. Every file is decoded once
// so mixed dimensions and corrupt files are reported up front.
FrameSequence load_sequence(const std::filesystem::path &dir, std::optional<std::string> id = std::nullopt);

// frame_%06d.<ext>
std::string frame_file_name(int index, const std::string &ext);

} // namespace alina
