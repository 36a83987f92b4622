#pragma once

#include "alina/color.hpp"
#include "alina/detect.hpp"
#include "alina/geometry.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace alina
{

struct TraversalParams
{
    int theta = 3;
    // false: the full (2*theta+1)^2 offset square; true: only offsets with
    // i*i + j*j <= theta*theta.
    bool disk_mode = false;
};

struct PixelSet
{
    std::vector<PixelCoord> pixels; ///< collection order
    std::uint64_t visit_count = 0;  ///< coordinates ever pushed
};

// Neighbour offsets in (i outer, j inner) product order, origin removed.
std::vector<PixelCoord> traversal_offsets(const TraversalParams &p);

// Stack-based depth-first collection of white pixels reachable from `seed`
// through hops of at most theta in each axis.
PixelSet circledat(const BinaryMask &mask, PixelCoord seed, const TraversalParams &p);
PixelSet circledat_multi(const BinaryMask &mask, const SeedSet &seeds, const TraversalParams &p);

// Full raster scan baseline; visit_count is always W*H.
PixelSet sliding_window_collect(const BinaryMask &mask);

struct BenchmarkRow
{
    std::string algorithm;
    std::string complexity;
    double median_ms = 0.0;
    std::uint64_t visits = 0;
};

struct BenchmarkReport
{
    std::vector<BenchmarkRow> rows;
    int runs = 0;
    int masks = 0;
};

struct BenchmarkOptions
{
    int runs = 30;
    int presence_threshold = default_presence_threshold;
    int seed_group_gap = default_seed_group_gap;
};

// Times both collectors over the whole corpus per run; seeds come from the
// histogram detector and are computed outside the timed region.
BenchmarkReport benchmark_traversal(const std::vector<BinaryMask> &masks, const TraversalParams &p,
                                    const BenchmarkOptions &opts = {});

// algorithm,complexity,median_ms,visits
void write_benchmark_csv(const BenchmarkReport &report, std::ostream &out);

} // namespace alina
