#include "alina/geometry.hpp"

#include "alina/error.hpp"
#include "kernels.hpp"

#include <algorithm>
#include <cmath>

namespace alina
{

namespace
{

using Mat3 = Homography::Matrix;

Mat3 multiply(const Mat3 &a, const Mat3 &b)
{
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                r[i][j] += a[i][k] * b[k][j];
    return r;
}

double det3(const Mat3 &m)
{
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

Mat3 adjugate(const Mat3 &m)
{
    Mat3 a;
    a[0][0] = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    a[0][1] = m[0][2] * m[2][1] - m[0][1] * m[2][2];
    a[0][2] = m[0][1] * m[1][2] - m[0][2] * m[1][1];
    a[1][0] = m[1][2] * m[2][0] - m[1][0] * m[2][2];
    a[1][1] = m[0][0] * m[2][2] - m[0][2] * m[2][0];
    a[1][2] = m[0][2] * m[1][0] - m[0][0] * m[1][2];
    a[2][0] = m[1][0] * m[2][1] - m[1][1] * m[2][0];
    a[2][1] = m[0][1] * m[2][0] - m[0][0] * m[2][1];
    a[2][2] = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    return a;
}

// Translate to the centroid and scale the mean distance to sqrt(2).
Mat3 conditioning(const std::array<Point, 4> &pts)
{
    double cx = 0, cy = 0;
    for (const auto &p : pts)
    {
        cx += p.x;
        cy += p.y;
    }
    cx /= 4;
    cy /= 4;
    double mean = 0;
    for (const auto &p : pts)
        mean += std::hypot(p.x - cx, p.y - cy);
    mean /= 4;
    if (!(mean > 0))
        throw Error(Errc::singular, "degenerate correspondence: coincident points");
    const double s = std::sqrt(2.0) / mean;
    return Mat3{{{s, 0, -s * cx}, {0, s, -s * cy}, {0, 0, 1}}};
}

Point apply(const Mat3 &m, Point p)
{
    const double w = m[2][0] * p.x + m[2][1] * p.y + m[2][2];
    return {(m[0][0] * p.x + m[0][1] * p.y + m[0][2]) / w, (m[1][0] * p.x + m[1][1] * p.y + m[1][2]) / w};
}

// Gaussian elimination with partial pivoting on an 8x8 system.
std::array<double, 8> solve8(std::array<std::array<double, 9>, 8> a)
{
    for (int col = 0; col < 8; ++col)
    {
        int pivot = col;
        for (int r = col + 1; r < 8; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col]))
                pivot = r;
        if (std::abs(a[pivot][col]) < 1e-12)
            throw Error(Errc::singular, "singular homography system (degenerate correspondence)");
        std::swap(a[col], a[pivot]);
        for (int r = col + 1; r < 8; ++r)
        {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0)
                continue;
            for (int c = col; c < 9; ++c)
                a[r][c] -= f * a[col][c];
        }
    }
    std::array<double, 8> x{};
    for (int r = 7; r >= 0; --r)
    {
        double s = a[r][8];
        for (int c = r + 1; c < 8; ++c)
            s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return x;
}

// Unknowns m11..m32 with m33 = 1; each pair maps d onto s.
Mat3 solve_direct(const std::array<Point, 4> &s, const std::array<Point, 4> &d)
{
    std::array<std::array<double, 9>, 8> a{};
    for (int k = 0; k < 4; ++k)
    {
        const double x = d[k].x, y = d[k].y, u = s[k].x, v = s[k].y;
        a[2 * k] = {x, y, 1, 0, 0, 0, -x * u, -y * u, u};
        a[2 * k + 1] = {0, 0, 0, x, y, 1, -x * v, -y * v, v};
    }
    const auto h = solve8(a);
    return Mat3{{{h[0], h[1], h[2]}, {h[3], h[4], h[5]}, {h[6], h[7], 1.0}}};
}

} // namespace

Homography::Homography() : m_{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}} {}

Homography::Homography(const Matrix &m) : m_(m)
{
    for (const auto &row : m)
        for (double v : row)
            if (!std::isfinite(v))
                throw Error(Errc::singular, "non-finite homography entry");
    const double scale = m_[2][2];
    if (std::abs(scale) < 1e-12)
        throw Error(Errc::singular, "homography cannot be normalised: m33 is zero");
    for (auto &row : m_)
        for (double &v : row)
            v /= scale;
    m_[2][2] = 1.0;
    if (std::abs(det3(m_)) <= 1e-12)
        throw Error(Errc::singular, "homography is not invertible");
}

double Homography::determinant() const noexcept { return det3(m_); }

Homography Homography::inverse() const
{
    const double det = det3(m_);
    Mat3 inv = adjugate(m_);
    for (auto &row : inv)
        for (double &v : row)
            v /= det;
    return Homography(inv);
}

Homography Homography::compose(const Homography &other) const { return Homography(multiply(m_, other.m_)); }

Homography compute_homography(const std::array<Point, 4> &src, const std::array<Point, 4> &dst)
{
    for (const auto &p : src)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw Error(Errc::invalid_argument, "non-finite source point");
    for (const auto &p : dst)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw Error(Errc::invalid_argument, "non-finite destination point");

    // Solve in conditioned coordinates, then undo the conditioning.
    const Mat3 ts = conditioning(src);
    const Mat3 td = conditioning(dst);
    std::array<Point, 4> sn, dn;
    for (int k = 0; k < 4; ++k)
    {
        sn[k] = apply(ts, src[k]);
        dn[k] = apply(td, dst[k]);
    }
    const Mat3 hn = solve_direct(sn, dn);
    const Mat3 ts_inv = Homography(ts).inverse().matrix();
    Homography h(multiply(multiply(ts_inv, hn), td));

    // One refinement pass against the unconditioned system removes the
    // rounding left by the change of coordinates.
    std::array<std::array<double, 9>, 8> a{};
    const auto &m = h.matrix();
    for (int k = 0; k < 4; ++k)
    {
        const double x = dst[k].x, y = dst[k].y, u = src[k].x, v = src[k].y;
        const double w = m[2][0] * x + m[2][1] * y + 1.0;
        const double ru = u * w - (m[0][0] * x + m[0][1] * y + m[0][2]);
        const double rv = v * w - (m[1][0] * x + m[1][1] * y + m[1][2]);
        a[2 * k] = {x, y, 1, 0, 0, 0, -x * u, -y * u, ru};
        a[2 * k + 1] = {0, 0, 0, x, y, 1, -x * v, -y * v, rv};
    }
    try
    {
        const auto delta = solve8(a);
        Mat3 refined = m;
        refined[0] = {m[0][0] + delta[0], m[0][1] + delta[1], m[0][2] + delta[2]};
        refined[1] = {m[1][0] + delta[3], m[1][1] + delta[4], m[1][2] + delta[5]};
        refined[2] = {m[2][0] + delta[6], m[2][1] + delta[7], 1.0};
        Homography candidate(refined);
        double before = 0, after = 0;
        for (int k = 0; k < 4; ++k)
        {
            double x, y;
            if (detail::project(h, dst[k].x, dst[k].y, x, y))
                before = std::max(before, std::hypot(x - src[k].x, y - src[k].y));
            if (detail::project(candidate, dst[k].x, dst[k].y, x, y))
                after = std::max(after, std::hypot(x - src[k].x, y - src[k].y));
        }
        if (after < before)
            h = candidate;
    }
    catch (const Error &)
    {
        // unconditioned system too ill-posed to refine; keep the conditioned solution
    }
    return h;
}

Homography roi_homography(const Roi &roi) { return compute_homography(roi.src, roi.dst_corners()); }

Point map_point(const Homography &h, Point p)
{
    Point out;
    if (!detail::project(h, p.x, p.y, out.x, out.y))
        throw Error(Errc::point_at_infinity, "point maps to infinity (vanishing denominator)");
    return out;
}

Frame warp_image(const Frame &in, const Homography &dst_to_src, Dims out_dims, Sampling sampling)
{
    if (out_dims.width < 0 || out_dims.height < 0)
        throw Error(Errc::invalid_argument, "negative output dimensions");
    Frame out(out_dims.width, out_dims.height, in.index());
    const int w = out_dims.width;
    const int h = out_dims.height;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y)
    {
        for (int x = 0; x < w; ++x)
        {
            double sx, sy;
            if (detail::project(dst_to_src, x, y, sx, sy))
                out.set(x, y, detail::sample(in, sx, sy, sampling));
        }
    }
    return out;
}

WarpedRoi warp_roi(const Frame &frame, const Roi &roi, Sampling sampling)
{
    if (auto v = validate_roi(roi, {frame.width(), frame.height()}))
        throw Error(Errc::invalid_roi, v->message);
    const Homography h = roi_homography(roi);
    return {warp_image(frame, h, {roi.dst_width, roi.dst_height}, sampling), h};
}

std::vector<PixelCoord> unwarp_pixels(const std::vector<PixelCoord> &mask_pixels, const Homography &dst_to_src,
                                      Dims frame_dims)
{
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(mask_pixels.size());
    std::vector<PixelCoord> mapped(mask_pixels.size());
    std::vector<std::uint8_t> keep(mask_pixels.size(), 0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
    {
        double fx, fy;
        if (!detail::project(dst_to_src, mask_pixels[i].x, mask_pixels[i].y, fx, fy))
            continue;
        const int x = detail::round_half_up(fx);
        const int y = detail::round_half_up(fy);
        if (x < 0 || y < 0 || x >= frame_dims.width || y >= frame_dims.height)
            continue;
        mapped[i] = {x, y};
        keep[i] = 1;
    }
    std::vector<PixelCoord> out;
    out.reserve(mask_pixels.size());
    for (std::size_t i = 0; i < mapped.size(); ++i)
        if (keep[i])
            out.push_back(mapped[i]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<PixelCoord> unwarp_mask(const BinaryMask &mask, const Roi &roi, Dims frame_dims)
{
    if (mask.width() != roi.dst_width || mask.height() != roi.dst_height)
        throw Error(Errc::dimension_mismatch, "mask dimensions differ from the ROI destination rectangle");
    std::vector<PixelCoord> white;
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.white(x, y))
                white.push_back({x, y});
    return unwarp_pixels(white, roi_homography(roi), frame_dims);
}

} // namespace alina
