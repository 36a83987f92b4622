#pragma once

#include "alina/frame.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace alina
{

// One 8-bit channel, row-major.
struct Plane
{
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    Plane() = default;
    Plane(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill)
    {
    }

    std::uint8_t at(int x, int y) const noexcept { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t &at(int x, int y) noexcept { return data[static_cast<std::size_t>(y) * width + x]; }

    friend bool operator==(const Plane &, const Plane &) = default;
};

struct HsvRoi
{
    int width = 0;
    int height = 0;
    Plane h, s, v;

    HsvRoi() = default;
    HsvRoi(int w, int h_) : width(w), height(h_), h(w, h_), s(w, h_), v(w, h_) {}

    friend bool operator==(const HsvRoi &, const HsvRoi &) = default;
};

struct Hsv
{
    std::uint8_t h = 0;
    std::uint8_t s = 0;
    std::uint8_t v = 0;

    friend bool operator==(const Hsv &, const Hsv &) = default;
};

struct HsvBounds
{
    Hsv lower{0, 70, 170};
    Hsv upper{255, 255, 255};

    bool valid() const noexcept
    {
        return lower.h <= upper.h && lower.s <= upper.s && lower.v <= upper.v;
    }
    bool contains(Hsv p) const noexcept
    {
        return lower.h <= p.h && p.h <= upper.h && lower.s <= p.s && p.s <= upper.s && lower.v <= p.v &&
               p.v <= upper.v;
    }
};

// Values are 0 or 255 only.
class BinaryMask
{
public:
    BinaryMask() = default;
    BinaryMask(int width, int height) : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, 0) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    bool white(int x, int y) const noexcept { return data_[static_cast<std::size_t>(y) * width_ + x] == 255; }
    std::uint8_t value(int x, int y) const noexcept { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    void set(int x, int y, bool on) noexcept { data_[static_cast<std::size_t>(y) * width_ + x] = on ? 255 : 0; }

    const std::vector<std::uint8_t> &bytes() const noexcept { return data_; }
    std::vector<std::uint8_t> &bytes() noexcept { return data_; }

    std::size_t count_white() const noexcept;

    friend bool operator==(const BinaryMask &, const BinaryMask &) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

// All three channels on [0,255]; hue is 255*degrees/360, achromatic hue is 0,
// every division rounds half-up.
Hsv rgb_to_hsv(Rgb c) noexcept;
HsvRoi rgb_to_hsv(const Frame &roi);

// 255*(x-min)/(max-min), rounded half-up; a constant plane becomes all zero.
Plane normalize_channel(const Plane &x);
HsvRoi normalize_hsv(const HsvRoi &roi);

BinaryMask threshold_hsv(const HsvRoi &roi, const HsvBounds &bounds);

} // namespace alina
