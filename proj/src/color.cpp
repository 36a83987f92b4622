#include "alina/color.hpp"

#include "alina/error.hpp"

#include <algorithm>

namespace alina
{

std::size_t BinaryMask::count_white() const noexcept
{
    return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{255}));
}

// Integer-exact: every ratio is rounded half-up as floor((2*num + den) / (2*den)).
Hsv rgb_to_hsv(Rgb c) noexcept
{
    const int r = c.r, g = c.g, b = c.b;
    const int v = std::max({r, g, b});
    const int mn = std::min({r, g, b});
    const int d = v - mn;
    Hsv out;
    out.v = static_cast<std::uint8_t>(v);
    if (v == 0 || d == 0)
    {
        out.s = v == 0 ? 0 : static_cast<std::uint8_t>((2 * 255 * d + v) / (2 * v));
        return out;
    }
    out.s = static_cast<std::uint8_t>((2 * 255 * d + v) / (2 * v));

    // hue in sixths of a turn scaled by d: degrees = 60 * n / d, n in [0, 6d)
    int n;
    if (v == r)
    {
        n = g - b;
        if (n < 0)
            n += 6 * d;
    }
    else if (v == g)
        n = b - r + 2 * d;
    else
        n = r - g + 4 * d;
    out.h = static_cast<std::uint8_t>((2 * 255 * n + 6 * d) / (12 * d));
    return out;
}

HsvRoi rgb_to_hsv(const Frame &roi)
{
    HsvRoi out(roi.width(), roi.height());
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(roi.width()) * roi.height();
    const std::uint8_t *src = roi.bytes().data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
    {
        const Hsv p = rgb_to_hsv(Rgb{src[3 * i], src[3 * i + 1], src[3 * i + 2]});
        out.h.data[i] = p.h;
        out.s.data[i] = p.s;
        out.v.data[i] = p.v;
    }
    return out;
}

Plane normalize_channel(const Plane &x)
{
    Plane out(x.width, x.height);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.data.size());
    if (n == 0)
        return out;
    int lo = 255, hi = 0;
#pragma omp parallel for reduction(min : lo) reduction(max : hi) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
    {
        lo = std::min<int>(lo, x.data[i]);
        hi = std::max<int>(hi, x.data[i]);
    }
    if (lo == hi)
        return out;
    const int range = hi - lo;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        out.data[i] = static_cast<std::uint8_t>((2 * 255 * (x.data[i] - lo) + range) / (2 * range));
    return out;
}

HsvRoi normalize_hsv(const HsvRoi &roi)
{
    HsvRoi out;
    out.width = roi.width;
    out.height = roi.height;
    out.h = normalize_channel(roi.h);
    out.s = normalize_channel(roi.s);
    out.v = normalize_channel(roi.v);
    return out;
}

BinaryMask threshold_hsv(const HsvRoi &roi, const HsvBounds &bounds)
{
    if (!bounds.valid())
        throw Error(Errc::invalid_argument, "HSV lower bound exceeds upper bound");
    BinaryMask out(roi.width, roi.height);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(roi.width) * roi.height;
    std::uint8_t *dst = out.bytes().data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        dst[i] = bounds.contains(Hsv{roi.h.data[i], roi.s.data[i], roi.v.data[i]}) ? 255 : 0;
    return out;
}

} // namespace alina
