#include "alina/reference.hpp"

#include "alina/error.hpp"
#include "kernels.hpp"

#include <set>

namespace alina::reference
{

Frame warp_image(const Frame &in, const Homography &dst_to_src, Dims out_dims, Sampling sampling)
{
    Frame out(out_dims.width, out_dims.height, in.index());
    for (int y = 0; y < out_dims.height; ++y)
        for (int x = 0; x < out_dims.width; ++x)
        {
            double sx, sy;
            if (detail::project(dst_to_src, x, y, sx, sy))
                out.set(x, y, detail::sample(in, sx, sy, sampling));
        }
    return out;
}

HsvRoi rgb_to_hsv(const Frame &roi)
{
    HsvRoi out(roi.width(), roi.height());
    for (int y = 0; y < roi.height(); ++y)
        for (int x = 0; x < roi.width(); ++x)
        {
            const Hsv p = alina::rgb_to_hsv(roi.at(x, y));
            out.h.at(x, y) = p.h;
            out.s.at(x, y) = p.s;
            out.v.at(x, y) = p.v;
        }
    return out;
}

Plane normalize_channel(const Plane &x)
{
    Plane out(x.width, x.height);
    if (x.data.empty())
        return out;
    int lo = 255, hi = 0;
    for (auto v : x.data)
    {
        lo = std::min<int>(lo, v);
        hi = std::max<int>(hi, v);
    }
    if (lo == hi)
        return out;
    for (std::size_t i = 0; i < x.data.size(); ++i)
        out.data[i] = detail::round_half_up_u8(255.0 * (x.data[i] - lo) / (hi - lo));
    return out;
}

BinaryMask threshold_hsv(const HsvRoi &roi, const HsvBounds &bounds)
{
    BinaryMask out(roi.width, roi.height);
    for (int y = 0; y < roi.height; ++y)
        for (int x = 0; x < roi.width; ++x)
            out.set(x, y, bounds.contains({roi.h.at(x, y), roi.s.at(x, y), roi.v.at(x, y)}));
    return out;
}

VerticalHistogram vertical_histogram(const BinaryMask &mask)
{
    VerticalHistogram hist;
    hist.mask_dims = {mask.width(), mask.height()};
    hist.counts.assign(static_cast<std::size_t>(mask.width()), 0);
    for (int x = 0; x < mask.width(); ++x)
        for (int y = 0; y < mask.height(); ++y)
            hist.counts[x] += mask.white(x, y) ? 1 : 0;
    return hist;
}

std::vector<PixelCoord> unwarp_pixels(const std::vector<PixelCoord> &mask_pixels, const Homography &dst_to_src,
                                      Dims frame_dims)
{
    std::set<PixelCoord> out;
    for (const auto &p : mask_pixels)
    {
        double fx, fy;
        if (!detail::project(dst_to_src, p.x, p.y, fx, fy))
            continue;
        const int x = detail::round_half_up(fx);
        const int y = detail::round_half_up(fy);
        if (x >= 0 && y >= 0 && x < frame_dims.width && y < frame_dims.height)
            out.insert({x, y});
    }
    return {out.begin(), out.end()};
}

} // namespace alina::reference
