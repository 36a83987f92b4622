// Serial reference kernels against the OpenMP kernels, plus CIRCLEDAT against
// the sliding-window scan.
#include "alina/color.hpp"
#include "alina/detect.hpp"
#include "alina/geometry.hpp"
#include "alina/reference.hpp"
#include "alina/synthetic.hpp"
#include "alina/traversal.hpp"

#include <benchmark/benchmark.h>

using namespace alina;

namespace
{

struct Inputs
{
    Frame frame;
    Roi roi;
    Homography dst_to_src;
    Frame warped;
    HsvRoi hsv;
    HsvRoi normalized;
    BinaryMask mask;
    std::vector<PixelCoord> mask_pixels;
    BinaryMask sparse;
    SeedSet sparse_seeds;
};

const Inputs &inputs()
{
    static const Inputs in = [] {
        Inputs i;
        const auto scene = synth::render_scene(synth::marking_scene(synth::MarkingShape::junction, 7), 7);
        i.frame = scene.frame;
        i.roi = synth::default_roi();
        i.dst_to_src = roi_homography(i.roi);
        i.warped = warp_image(i.frame, i.dst_to_src, {i.roi.dst_width, i.roi.dst_height});
        i.hsv = rgb_to_hsv(i.warped);
        i.normalized = normalize_hsv(i.hsv);
        i.mask = threshold_hsv(i.normalized, HsvBounds{});
        for (int y = 0; y < i.mask.height(); ++y)
            for (int x = 0; x < i.mask.width(); ++x)
                if (i.mask.white(x, y))
                    i.mask_pixels.push_back({x, y});
        i.sparse = synth::sparse_line_mask(1920, 1080, 0.01, 3, 11);
        i.sparse_seeds = extract_seeds(i.sparse, decide_presence(vertical_histogram(i.sparse), 0));
        return i;
    }();
    return in;
}

Dims dst_dims(const Inputs &in) { return {in.roi.dst_width, in.roi.dst_height}; }

void BM_warp_reference(benchmark::State &st)
{
    const auto &in = inputs();
    for (auto _ : st)
        benchmark::DoNotOptimize(reference::warp_image(in.frame, in.dst_to_src, dst_dims(in), Sampling::bilinear));
}

void BM_warp_openmp(benchmark::State &st)
{
    const auto &in = inputs();
    for (auto _ : st)
        benchmark::DoNotOptimize(warp_image(in.frame, in.dst_to_src, dst_dims(in), Sampling::bilinear));
}

void BM_hsv_reference(benchmark::State &st)
{
    for (auto _ : st)
        benchmark::DoNotOptimize(reference::rgb_to_hsv(inputs().warped));
}

void BM_hsv_openmp(benchmark::State &st)
{
    for (auto _ : st)
        benchmark::DoNotOptimize(rgb_to_hsv(inputs().warped));
}

void BM_normalize_reference(benchmark::State &st)
{
    for (auto _ : st)
        benchmark::DoNotOptimize(reference::normalize_channel(inputs().hsv.v));
}

void BM_normalize_openmp(benchmark::State &st)
{
    for (auto _ : st)
        benchmark::DoNotOptimize(normalize_channel(inputs().hsv.v));
}

void BM_threshold_reference(benchmark::State &st)
{
    for (auto _ : st)
        benchmark::DoNotOptimize(reference::threshold_hsv(inputs().normalized, HsvBounds{}));
}

void BM_threshold_openmp(benchmark::State &st)
{
    for (auto _ : st)
        benchmark::DoNotOptimize(threshold_hsv(inputs().normalized, HsvBounds{}));
}

void BM_histogram_reference(benchmark::State &st)
{
    for (auto _ : st)
        benchmark::DoNotOptimize(reference::vertical_histogram(inputs().sparse));
}

void BM_histogram_openmp(benchmark::State &st)
{
    for (auto _ : st)
        benchmark::DoNotOptimize(vertical_histogram(inputs().sparse));
}

void BM_unwarp_reference(benchmark::State &st)
{
    const auto &in = inputs();
    for (auto _ : st)
        benchmark::DoNotOptimize(reference::unwarp_pixels(in.mask_pixels, in.dst_to_src, {640, 480}));
}

void BM_unwarp_openmp(benchmark::State &st)
{
    const auto &in = inputs();
    for (auto _ : st)
        benchmark::DoNotOptimize(unwarp_pixels(in.mask_pixels, in.dst_to_src, {640, 480}));
}

void BM_sliding_window(benchmark::State &st)
{
    for (auto _ : st)
        benchmark::DoNotOptimize(sliding_window_collect(inputs().sparse));
}

void BM_circledat(benchmark::State &st)
{
    const auto &in = inputs();
    for (auto _ : st)
        benchmark::DoNotOptimize(circledat_multi(in.sparse, in.sparse_seeds, {3, false}));
}

} // namespace

BENCHMARK(BM_warp_reference)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_warp_openmp)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_hsv_reference)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_hsv_openmp)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_normalize_reference)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_normalize_openmp)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_threshold_reference)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_threshold_openmp)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_histogram_reference)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_histogram_openmp)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_unwarp_reference)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_unwarp_openmp)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_sliding_window)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_circledat)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
