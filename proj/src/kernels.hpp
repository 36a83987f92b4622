#pragma once

// Per-pixel building blocks shared by the OpenMP kernels and the serial
// reference kernels.

#include "alina/color.hpp"
#include "alina/frame.hpp"
#include "alina/geometry.hpp"

#include <cmath>
#include <cstdint>

namespace alina::detail
{

inline std::uint8_t round_half_up_u8(double v) noexcept
{
    const double r = std::floor(v + 0.5);
    return static_cast<std::uint8_t>(r < 0 ? 0 : (r > 255 ? 255 : r));
}

// Bounds tolerance so integral mappings computed in floating point do not
// lose the last row or column.
inline constexpr double sample_slack = 1e-6;

inline Rgb sample(const Frame &in, double sx, double sy, Sampling sampling) noexcept
{
    const int w = in.width();
    const int h = in.height();
    if (!(sx >= -sample_slack && sy >= -sample_slack && sx <= w - 1 + sample_slack && sy <= h - 1 + sample_slack))
        return {};
    sx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
    sy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
    if (sampling == Sampling::nearest)
    {
        const int x = std::min(static_cast<int>(std::floor(sx + 0.5)), w - 1);
        const int y = std::min(static_cast<int>(std::floor(sy + 0.5)), h - 1);
        return in.at(x, y);
    }
    const int x0 = static_cast<int>(std::floor(sx));
    const int y0 = static_cast<int>(std::floor(sy));
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fx = sx - x0;
    const double fy = sy - y0;
    const Rgb a = in.at(x0, y0), b = in.at(x1, y0), c = in.at(x0, y1), d = in.at(x1, y1);
    auto mix = [&](std::uint8_t pa, std::uint8_t pb, std::uint8_t pc, std::uint8_t pd) {
        const double top = pa + (pb - pa) * fx;
        const double bottom = pc + (pd - pc) * fx;
        return round_half_up_u8(top + (bottom - top) * fy);
    };
    return {mix(a.r, b.r, c.r, d.r), mix(a.g, b.g, c.g, d.g), mix(a.b, b.b, c.b, d.b)};
}

// Projective map without the vanishing-denominator check; callers guard w.
inline bool project(const Homography &h, double x, double y, double &ox, double &oy) noexcept
{
    const auto &m = h.matrix();
    const double w = m[2][0] * x + m[2][1] * y + m[2][2];
    if (std::abs(w) <= 1e-12)
        return false;
    ox = (m[0][0] * x + m[0][1] * y + m[0][2]) / w;
    oy = (m[1][0] * x + m[1][1] * y + m[1][2]) / w;
    return true;
}

inline int round_half_up(double v) noexcept { return static_cast<int>(std::floor(v + 0.5)); }

} // namespace alina::detail
