#include "alina/detect.hpp"

#include "alina/error.hpp"

#include <algorithm>
#include <limits>

namespace alina
{

int VerticalHistogram::peak() const noexcept
{
    return counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
}

VerticalHistogram vertical_histogram(const BinaryMask &mask)
{
    const int w = mask.width();
    const int h = mask.height();
    VerticalHistogram hist;
    hist.mask_dims = {w, h};
    hist.counts.assign(static_cast<std::size_t>(w), 0);
    if (w == 0 || h == 0)
        return hist;
    int *counts = hist.counts.data();
    const std::uint8_t *data = mask.bytes().data();
#pragma omp parallel for reduction(+ : counts[:w]) schedule(static)
    for (int y = 0; y < h; ++y)
    {
        const std::uint8_t *row = data + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x)
            counts[x] += row[x] == 255;
    }
    return hist;
}

PresenceDecision decide_presence(const VerticalHistogram &h, int threshold)
{
    if (threshold < 0)
        throw Error(Errc::invalid_argument, "presence threshold must be non-negative");
    PresenceDecision d;
    d.threshold = threshold;
    d.peak_value = h.peak();
    auto hit = [threshold](int count) { return threshold == 0 ? count > 0 : count >= threshold; };
    d.present = hit(d.peak_value);
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        if (hit(h.counts[i]))
            d.peak_columns.push_back(static_cast<int>(i));
    return d;
}

SeedSet extract_seeds(const BinaryMask &mask, const PresenceDecision &d, int group_gap)
{
    if (!d.present)
        throw Error(Errc::precondition, "extract_seeds called without a detected marking");
    if (group_gap < 0)
        throw Error(Errc::invalid_argument, "seed group gap must be non-negative");

    std::vector<int> cols = d.peak_columns;
    std::sort(cols.begin(), cols.end());
    std::vector<std::vector<int>> groups;
    for (int c : cols)
    {
        if (c < 0 || c >= mask.width())
            throw Error(Errc::out_of_bounds, "peak column outside the mask");
        if (groups.empty() || c - groups.back().back() > group_gap)
            groups.emplace_back();
        groups.back().push_back(c);
    }

    SeedSet seeds;
    for (const auto &group : groups)
    {
        double sx = 0, sy = 0;
        std::size_t n = 0;
        for (int x : group)
            for (int y = 0; y < mask.height(); ++y)
                if (mask.white(x, y))
                {
                    sx += x;
                    sy += y;
                    ++n;
                }
        if (n == 0)
            continue;
        const double cx = sx / static_cast<double>(n);
        const double cy = sy / static_cast<double>(n);

        PixelCoord best{};
        double best_d = std::numeric_limits<double>::infinity();
        for (int x : group)
            for (int y = 0; y < mask.height(); ++y)
            {
                if (!mask.white(x, y))
                    continue;
                const double dd = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                const PixelCoord p{x, y};
                if (dd < best_d || (dd == best_d && p < best))
                {
                    best_d = dd;
                    best = p;
                }
            }
        seeds.seeds.push_back(best);
    }
    return seeds;
}

void accumulate_profile(HsvProfile &profile, const HsvRoi &roi, const BinaryMask &mask)
{
    if (roi.width != mask.width() || roi.height != mask.height())
        throw Error(Errc::dimension_mismatch, "HSV ROI and marking mask dimensions differ");
    const std::size_t n = static_cast<std::size_t>(roi.width) * roi.height;
    for (std::size_t i = 0; i < n; ++i)
    {
        if (mask.bytes()[i] != 255)
            continue;
        ++profile.bins[0][roi.h.data[i]];
        ++profile.bins[1][roi.s.data[i]];
        ++profile.bins[2][roi.v.data[i]];
    }
}

HsvProfile hsv_frequency_profile(const std::vector<HsvRoi> &rois, const std::vector<BinaryMask> &marking_masks)
{
    if (rois.size() != marking_masks.size())
        throw Error(Errc::dimension_mismatch, "need one marking mask per HSV ROI");
    HsvProfile profile;
    for (std::size_t k = 0; k < rois.size(); ++k)
        accumulate_profile(profile, rois[k], marking_masks[k]);
    return profile;
}

void write_profile_csv(const HsvProfile &profile, std::ostream &out)
{
    static const char *names[] = {"H", "S", "V"};
    out << "channel,bin,count\n";
    for (int c = 0; c < 3; ++c)
        for (int b = 0; b < 256; ++b)
            out << names[c] << ',' << b << ',' << profile.bins[c][b] << '\n';
}

} // namespace alina
