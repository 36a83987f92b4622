#pragma once

#include "alina/color.hpp"
#include "alina/eval.hpp"
#include "alina/frame.hpp"
#include "alina/geometry.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace alina::synth
{

// Scenes are authored on the ground plane, i.e. in the bird's-eye rectangle
// of the ROI, and projected into the frame through the ROI homography.
enum class MarkingShape
{
    straight,
    curved,
    junction,
};

struct Stroke
{
    std::vector<Point> path; ///< polyline in bird's-eye coordinates
    double half_width = 6.0;
};

struct SceneSpec
{
    Dims frame{640, 480};
    Roi roi;
    std::vector<Stroke> strokes;
    Rgb marking_color{235, 200, 40};
    int background_lo = 25;
    int background_hi = 75;
    int tint = 6;        ///< per-pixel channel jitter on the background
    double outline_margin = 4.0;
    bool marking = true; ///< false: strokes are clutter with no truth or outline
};

struct Scene
{
    Frame frame;
    std::vector<PixelCoord> truth; ///< frame pixels painted as marking
    ContourOutline outline;
};

Roi default_roi();

// Deterministic for a given seed.
Scene render_scene(const SceneSpec &spec, std::uint64_t seed);

SceneSpec marking_scene(MarkingShape shape, std::uint64_t seed, const Roi &roi = default_roi());

// Background-only frame with bright blobs whose bird's-eye vertical extent
// is `blob_height` (0 = no blobs at all).
SceneSpec noise_scene(int blob_height, std::uint64_t seed, const Roi &roi = default_roi());

// Sparse marking-like mask: `lines` vertical-ish bands covering about
// `white_fraction` of the pixels.
BinaryMask sparse_line_mask(int width, int height, double white_fraction, int lines, std::uint64_t seed);

// Writes frame_%06d.png files plus outlines/ and truth/.
void write_sequence(const std::vector<Scene> &scenes, const std::filesystem::path &dir);

} // namespace alina::synth
