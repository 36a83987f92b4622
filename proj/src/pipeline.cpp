#include "alina/pipeline.hpp"

#include "alina/error.hpp"
#include "alina/image_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace alina
{

namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

double median(std::vector<double> values)
{
    if (values.empty())
        return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

Roi effective_roi(const Roi &roi, const PipelineConfig &cfg, Dims dims)
{
    Roi r = roi;
    if (cfg.dst_width > 0)
        r.dst_width = cfg.dst_width;
    if (cfg.dst_height > 0)
        r.dst_height = cfg.dst_height;
    if (auto v = validate_roi(r, dims))
        throw Error(Errc::invalid_roi, v->message);
    return r;
}

FrameAnnotator::FrameAnnotator(const Roi &roi, const PipelineConfig &cfg, Dims frame_dims)
    : roi_(effective_roi(roi, cfg, frame_dims)), cfg_(cfg), dims_(frame_dims), homography_(roi_homography(roi_))
{
    if (!cfg.hsv.valid())
        throw Error(Errc::invalid_argument, "HSV lower bound exceeds upper bound");
    if (cfg.threshold < 0)
        throw Error(Errc::invalid_argument, "presence threshold must be non-negative");
    if (cfg.traversal.theta < 1 || cfg.traversal.theta > std::min(roi_.dst_width, roi_.dst_height))
        throw Error(Errc::invalid_argument, "theta must lie in [1, min(dst_width, dst_height)]");
}

namespace
{

template <class Fn>
auto run_stage(Stage stage, Fn &&fn) -> decltype(fn())
{
    try
    {
        return fn();
    }
    catch (const StageError &)
    {
        throw;
    }
    catch (const Error &e)
    {
        throw StageError(std::string(stage_names[static_cast<std::size_t>(stage)]), e);
    }
}

double elapsed_ms(clock_type::time_point a, clock_type::time_point b)
{
    return std::chrono::duration<double, std::milli>(b - a).count();
}

} // namespace

FrameAnalysis FrameAnnotator::analyze(const Frame &frame) const
{
    if (frame.width() != dims_.width || frame.height() != dims_.height)
        throw Error(Errc::dimension_mismatch, "frame dimensions differ from the sequence");
    FrameAnalysis a;
    a.warped = {warp_image(frame, homography_, {roi_.dst_width, roi_.dst_height}, cfg_.sampling), homography_};
    a.hsv = rgb_to_hsv(a.warped.frame);
    a.normalized = normalize_hsv(a.hsv);
    a.mask = threshold_hsv(a.normalized, cfg_.hsv);
    a.histogram = vertical_histogram(a.mask);
    return a;
}

FrameResult FrameAnnotator::annotate(const Frame &frame) const
{
    if (frame.width() != dims_.width || frame.height() != dims_.height)
        throw Error(Errc::dimension_mismatch, "frame dimensions differ from the sequence");

    FrameResult result;
    result.record.frame_index = frame.index();
    auto &ms = result.stage_ms;

    auto t0 = clock_type::now();
    const Frame warped = run_stage(Stage::perspective_transformation, [&] {
        return warp_image(frame, homography_, {roi_.dst_width, roi_.dst_height}, cfg_.sampling);
    });
    auto t1 = clock_type::now();
    ms[0] = elapsed_ms(t0, t1);

    const HsvRoi normalized =
        run_stage(Stage::color_feature_normalization, [&] { return normalize_hsv(rgb_to_hsv(warped)); });
    auto t2 = clock_type::now();
    ms[1] = elapsed_ms(t1, t2);

    const BinaryMask mask = run_stage(Stage::hsv_thresholding, [&] { return threshold_hsv(normalized, cfg_.hsv); });
    auto t3 = clock_type::now();
    ms[2] = elapsed_ms(t2, t3);

    SeedSet seeds;
    const PresenceDecision decision = run_stage(Stage::histogram_analysis, [&] {
        auto d = decide_presence(vertical_histogram(mask), cfg_.threshold);
        if (d.present)
            seeds = extract_seeds(mask, d, cfg_.seed_group_gap);
        return d;
    });
    auto t4 = clock_type::now();
    ms[3] = elapsed_ms(t3, t4);

    PixelSet collected;
    if (decision.present)
        collected = run_stage(Stage::circledat, [&] { return circledat_multi(mask, seeds, cfg_.traversal); });
    auto t5 = clock_type::now();
    ms[4] = elapsed_ms(t4, t5);

    result.overlay = frame;
    if (decision.present)
    {
        result.record.pixels =
            run_stage(Stage::projection_remapping, [&] { return unwarp_pixels(collected.pixels, homography_, dims_); });
        for (const auto &p : result.record.pixels)
            result.overlay.set(p.x, p.y, cfg_.overlay_color);
    }
    result.record.present = decision.present && !result.record.pixels.empty();
    result.record.seed_count = static_cast<int>(seeds.seeds.size());
    auto t6 = clock_type::now();
    ms[5] = elapsed_ms(t5, t6);
    return result;
}

FrameResult annotate_frame(const Frame &frame, const Roi &roi, const PipelineConfig &cfg)
{
    return FrameAnnotator(roi, cfg, {frame.width(), frame.height()}).annotate(frame);
}

std::string format_coords(const AnnotationRecord &record)
{
    std::string out;
    if (!record.present)
        return out;
    out.reserve(record.pixels.size() * 9);
    char buf[32];
    for (const auto &p : record.pixels)
    {
        const int n = std::snprintf(buf, sizeof buf, "%d %d\n", p.x, p.y);
        out.append(buf, static_cast<std::size_t>(n));
    }
    return out;
}

static void write_text(const fs::path &path, const std::string &text)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(Errc::io_failed, "cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out)
        throw Error(Errc::io_failed, "short write to " + path.string());
}

void write_coords(const AnnotationRecord &record, const fs::path &path) { write_text(path, format_coords(record)); }

std::vector<PixelCoord> read_coords(const fs::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::not_found, "cannot open " + path.string());
    std::vector<PixelCoord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        if (line.empty())
            continue;
        std::istringstream ls(line);
        PixelCoord p;
        if (!(ls >> p.x >> p.y))
            throw Error(Errc::decode_failed, path.string() + ":" + std::to_string(lineno) + ": expected \"x y\"");
        out.push_back(p);
    }
    return out;
}

fs::path SequenceOutputs::overlay(int index) const { return overlays() / frame_file_name(index, "png"); }
fs::path SequenceOutputs::coords(int index) const { return coords() / frame_file_name(index, "txt"); }

SequenceOutputs sequence_outputs(const fs::path &out_dir, const std::string &sequence_id)
{
    return {out_dir / sequence_id};
}

TimingReport timing_from_samples(const std::array<std::vector<double>, stage_count> &samples)
{
    TimingReport t;
    for (std::size_t s = 0; s < stage_count; ++s)
    {
        t.stage_ms[s] = median(samples[s]);
        t.total_ms += t.stage_ms[s];
    }
    return t;
}

std::string pipeline_config_to_json(const PipelineConfig &cfg)
{
    nlohmann::ordered_json j;
    j["hsv.lower"] = {cfg.hsv.lower.h, cfg.hsv.lower.s, cfg.hsv.lower.v};
    j["hsv.upper"] = {cfg.hsv.upper.h, cfg.hsv.upper.s, cfg.hsv.upper.v};
    j["detect.threshold"] = cfg.threshold;
    j["detect.seed_group_gap"] = cfg.seed_group_gap;
    j["traversal.theta"] = cfg.traversal.theta;
    j["traversal.disk_mode"] = cfg.traversal.disk_mode;
    j["geometry.sampling"] = cfg.sampling == Sampling::bilinear ? "bilinear" : "nearest";
    j["roi.dst_width"] = cfg.dst_width;
    j["roi.dst_height"] = cfg.dst_height;
    j["pipeline.overlay_color"] = {cfg.overlay_color.r, cfg.overlay_color.g, cfg.overlay_color.b};
    return j.dump();
}

std::string summary_to_json(const RunSummary &summary, const PipelineConfig &cfg, const Roi &roi)
{
    nlohmann::ordered_json j;
    j["sequence_id"] = summary.sequence_id;
    j["frames_total"] = summary.frames_total;
    j["frames_processed"] = summary.frames_processed;
    j["frames_with_marking"] = summary.frames_with_marking;
    j["frames_failed"] = summary.frames_failed;
    j["errors"] = summary.errors;
    nlohmann::ordered_json timing;
    for (std::size_t s = 0; s < stage_count; ++s)
        timing[std::string(stage_names[s])] = summary.timing.stage_ms[s];
    timing["total"] = summary.timing.total_ms;
    j["timing_ms"] = timing;
    j["roi"] = nlohmann::ordered_json::parse(roi_to_json_text(roi));
    j["config"] = nlohmann::ordered_json::parse(pipeline_config_to_json(cfg));
    return j.dump(2) + "\n";
}

RunSummary run_sequence(const FrameSequence &seq, const Roi &roi, const PipelineConfig &cfg, const ProgressFn &progress)
{
    const FrameAnnotator annotator(roi, cfg, seq.frame_dims());
    const SequenceOutputs outputs = sequence_outputs(cfg.output_dir, seq.id());
    fs::create_directories(outputs.overlays());
    fs::create_directories(outputs.coords());

    RunSummary summary;
    summary.sequence_id = seq.id();
    summary.frames_total = seq.frame_count();
    std::array<std::vector<double>, stage_count> samples;

    for (int i = 0; i < seq.frame_count(); ++i)
    {
        try
        {
            const Frame frame = seq.frame(i);
            const FrameResult r = annotator.annotate(frame);
            write_png(r.overlay, outputs.overlay(i));
            write_coords(r.record, outputs.coords(i));
            for (std::size_t s = 0; s < stage_count; ++s)
                samples[s].push_back(r.stage_ms[s]);
            ++summary.frames_processed;
            if (r.record.present)
                ++summary.frames_with_marking;
        }
        catch (const std::exception &e)
        {
            ++summary.frames_failed;
            summary.errors.push_back("frame " + std::to_string(i) + ": " + e.what());
        }
        if (progress)
            progress(i + 1, seq.frame_count());
    }
    summary.timing = timing_from_samples(samples);
    write_text(outputs.summary(), summary_to_json(summary, cfg, annotator.roi()));
    return summary;
}

TimingReport measure_stage_timings(const FrameSequence &seq, const Roi &roi, const PipelineConfig &cfg, int repeats)
{
    if (repeats < 1)
        throw Error(Errc::invalid_argument, "repeats must be >= 1");
    const FrameAnnotator annotator(roi, cfg, seq.frame_dims());
    std::vector<Frame> frames;
    frames.reserve(static_cast<std::size_t>(seq.frame_count()));
    for (int i = 0; i < seq.frame_count(); ++i)
        frames.push_back(seq.frame(i));

    std::array<std::vector<double>, stage_count> samples;
    for (int r = 0; r < repeats; ++r)
        for (const auto &f : frames)
        {
            const auto res = annotator.annotate(f);
            for (std::size_t s = 0; s < stage_count; ++s)
                samples[s].push_back(res.stage_ms[s]);
        }
    return timing_from_samples(samples);
}

} // namespace alina
