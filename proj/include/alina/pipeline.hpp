#pragma once

#include "alina/color.hpp"
#include "alina/detect.hpp"
#include "alina/frame.hpp"
#include "alina/geometry.hpp"
#include "alina/traversal.hpp"

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace alina
{

struct PipelineConfig
{
    std::filesystem::path roi_path;
    HsvBounds hsv;
    int threshold = default_presence_threshold;
    int seed_group_gap = default_seed_group_gap;
    TraversalParams traversal;
    Sampling sampling = Sampling::bilinear;
    Rgb overlay_color{255, 0, 0};
    std::filesystem::path output_dir = "out";
    // Overrides for the ROI's destination rectangle (0 = keep the ROI's).
    int dst_width = 0;
    int dst_height = 0;
};

enum class Stage
{
    perspective_transformation,
    color_feature_normalization,
    hsv_thresholding,
    histogram_analysis,
    circledat,
    projection_remapping,
};

inline constexpr std::size_t stage_count = 6;
inline constexpr std::array<std::string_view, stage_count> stage_names = {
    "perspective_transformation", "color_feature_normalization", "hsv_thresholding",
    "histogram_analysis",         "circledat",                   "projection_remapping",
};

struct AnnotationRecord
{
    int frame_index = 0;
    bool present = false;
    std::vector<PixelCoord> pixels; ///< frame space, sorted by (y, x)
    int seed_count = 0;
};

struct TimingReport
{
    std::array<double, stage_count> stage_ms{};
    double total_ms = 0.0; ///< sum of the stage medians
};

struct FrameResult
{
    AnnotationRecord record;
    Frame overlay;
    std::array<double, stage_count> stage_ms{};
};

// Intermediate products of the colour and detection stages.
struct FrameAnalysis
{
    WarpedRoi warped;
    HsvRoi hsv;
    HsvRoi normalized;
    BinaryMask mask;
    VerticalHistogram histogram;
};

// Runs the per-frame flow with one ROI and one homography.
class FrameAnnotator
{
public:
    FrameAnnotator(const Roi &roi, const PipelineConfig &cfg, Dims frame_dims);

    const Roi &roi() const noexcept { return roi_; }
    const Homography &homography() const noexcept { return homography_; }

    FrameResult annotate(const Frame &frame) const;
    FrameAnalysis analyze(const Frame &frame) const;

private:
    Roi roi_;
    PipelineConfig cfg_;
    Dims dims_;
    Homography homography_;
};

// Applies the config's destination overrides and validates against dims.
// Throws Errc::invalid_roi.
Roi effective_roi(const Roi &roi, const PipelineConfig &cfg, Dims dims);

FrameResult annotate_frame(const Frame &frame, const Roi &roi, const PipelineConfig &cfg);

// One "x y" line per pixel, LF-terminated; zero bytes when absent.
std::string format_coords(const AnnotationRecord &record);
void write_coords(const AnnotationRecord &record, const std::filesystem::path &path);
std::vector<PixelCoord> read_coords(const std::filesystem::path &path);

struct RunSummary
{
    std::string sequence_id;
    int frames_total = 0;
    int frames_processed = 0;
    int frames_with_marking = 0;
    int frames_failed = 0;
    std::vector<std::string> errors;
    TimingReport timing;
};

struct SequenceOutputs
{
    std::filesystem::path root;
    std::filesystem::path overlays() const { return root / "overlays"; }
    std::filesystem::path coords() const { return root / "coords"; }
    std::filesystem::path summary() const { return root / "summary.json"; }
    std::filesystem::path overlay(int index) const;
    std::filesystem::path coords(int index) const;
};

SequenceOutputs sequence_outputs(const std::filesystem::path &out_dir, const std::string &sequence_id);

using ProgressFn = std::function<void(int frames_done, int frames_total)>;

// Annotates every frame with the single ROI, writes overlays, coordinate
// files and summary.json. Per-frame failures are counted and skipped.
RunSummary run_sequence(const FrameSequence &seq, const Roi &roi, const PipelineConfig &cfg,
                        const ProgressFn &progress = {});

TimingReport measure_stage_timings(const FrameSequence &seq, const Roi &roi, const PipelineConfig &cfg, int repeats);
TimingReport timing_from_samples(const std::array<std::vector<double>, stage_count> &samples);

std::string summary_to_json(const RunSummary &summary, const PipelineConfig &cfg, const Roi &roi);
std::string pipeline_config_to_json(const PipelineConfig &cfg);

double median(std::vector<double> values);

} // namespace alina
