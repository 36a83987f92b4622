#pragma once

#include "alina/color.hpp"
#include "alina/geometry.hpp"

#include <array>
#include <cstdint>
#include <ostream>
#include <vector>

namespace alina
{

struct VerticalHistogram
{
    std::vector<int> counts; ///< one entry per mask column
    Dims mask_dims;

    int peak() const noexcept;
};

struct PresenceDecision
{
    bool present = false;
    int peak_value = 0;
    std::vector<int> peak_columns;
    int threshold = 0;
};

struct SeedSet
{
    std::vector<PixelCoord> seeds;
};

VerticalHistogram vertical_histogram(const BinaryMask &mask);

// Threshold 0 is the no-threshold mode: present iff the peak is strictly
// positive. Any other threshold is inclusive (peak >= t).
PresenceDecision decide_presence(const VerticalHistogram &h, int threshold);

inline constexpr int default_presence_threshold = 150;
inline constexpr int default_seed_group_gap = 20;

// Groups peak columns whose spacing is at most `group_gap` and returns, per
// group, the white pixel closest to the centroid of every white pixel in the
// group's columns (ties: smaller y, then smaller x). Throws Errc::precondition
// if the decision says absent.
SeedSet extract_seeds(const BinaryMask &mask, const PresenceDecision &d, int group_gap = default_seed_group_gap);

// 256-bin tallies of H, S and V under white mask pixels.
struct HsvProfile
{
    std::array<std::array<std::uint64_t, 256>, 3> bins{};

    const std::array<std::uint64_t, 256> &h() const { return bins[0]; }
    const std::array<std::uint64_t, 256> &s() const { return bins[1]; }
    const std::array<std::uint64_t, 256> &v() const { return bins[2]; }
};

HsvProfile hsv_frequency_profile(const std::vector<HsvRoi> &rois, const std::vector<BinaryMask> &marking_masks);
void accumulate_profile(HsvProfile &profile, const HsvRoi &roi, const BinaryMask &mask);

// channel,bin,count
void write_profile_csv(const HsvProfile &profile, std::ostream &out);

} // namespace alina
