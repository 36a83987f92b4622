#pragma once

// Single-threaded reference kernels. They mirror the OpenMP kernels used by the
// pipeline and exist so tests and benchmarks can compare the two.

#include "alina/color.hpp"
#include "alina/detect.hpp"
#include "alina/frame.hpp"
#include "alina/geometry.hpp"

namespace alina::reference
{

Frame warp_image(const Frame &in, const Homography &dst_to_src, Dims out_dims, Sampling sampling);
HsvRoi rgb_to_hsv(const Frame &roi);
Plane normalize_channel(const Plane &x);
BinaryMask threshold_hsv(const HsvRoi &roi, const HsvBounds &bounds);
VerticalHistogram vertical_histogram(const BinaryMask &mask);
std::vector<PixelCoord> unwarp_pixels(const std::vector<PixelCoord> &mask_pixels, const Homography &dst_to_src,
                                      Dims frame_dims);

} // namespace alina::reference
