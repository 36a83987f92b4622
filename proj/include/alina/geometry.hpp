#pragma once

#include "alina/color.hpp"
#include "alina/frame.hpp"

#include <array>
#include <vector>

namespace alina
{

// 3x3 projective matrix with m[2][2] pinned to 1.
class Homography
{
public:
    using Matrix = std::array<std::array<double, 3>, 3>;

    Homography();
    // Rescales so m[2][2] == 1. Throws Errc::singular if that is impossible or
    // the matrix is not invertible.
    explicit Homography(const Matrix &m);

    static Homography identity() { return Homography(); }

    const Matrix &matrix() const noexcept { return m_; }
    double operator()(int r, int c) const noexcept { return m_[r][c]; }

    double determinant() const noexcept;
    Homography inverse() const;

    // this * other: applies `other` first.
    Homography compose(const Homography &other) const;

private:
    Matrix m_;
};

// Solves the 8-unknown correspondence system so that mapping each dst point
// through the result lands on the matching src point. Throws Errc::singular.
Homography compute_homography(const std::array<Point, 4> &src, const std::array<Point, 4> &dst);

// Dst-to-src matrix for a region of interest.
Homography roi_homography(const Roi &roi);

// Projective map of one point. Throws Errc::point_at_infinity when the
// denominator vanishes.
Point map_point(const Homography &h, Point p);

enum class Sampling
{
    bilinear,
    nearest,
};

struct WarpedRoi
{
    Frame frame;
    Homography homography; ///< dst -> src
};

// Resamples an arbitrary image: out(x,y) = in(map_point(dst_to_src, (x,y))).
// Samples outside `in` are black.
Frame warp_image(const Frame &in, const Homography &dst_to_src, Dims out_dims, Sampling sampling = Sampling::bilinear);

WarpedRoi warp_roi(const Frame &frame, const Roi &roi, Sampling sampling = Sampling::bilinear);

struct PixelCoord
{
    int x = 0;
    int y = 0;

    friend bool operator==(const PixelCoord &, const PixelCoord &) = default;
    friend auto operator<=>(const PixelCoord &a, const PixelCoord &b)
    {
        if (a.y != b.y)
            return a.y <=> b.y;
        return a.x <=> b.x;
    }
};

// White mask pixels carried back to frame space: mapped through the dst->src
// matrix, rounded half-up, clipped to the frame, deduplicated. Output is
// sorted by (y, x).
std::vector<PixelCoord> unwarp_mask(const BinaryMask &mask, const Roi &roi, Dims frame_dims);
std::vector<PixelCoord> unwarp_pixels(const std::vector<PixelCoord> &mask_pixels, const Homography &dst_to_src, Dims frame_dims);

} // namespace alina
