#pragma once

#include "alina/color.hpp"
#include "alina/frame.hpp"
#include "alina/geometry.hpp"
#include "alina/image_io.hpp"
#include "alina/pipeline.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace alina
{

// Manually outlined region around the markings of one frame. Several
// polygons may be given for frames showing more than one marking.
struct ContourOutline
{
    int frame_index = 0;
    std::vector<std::vector<Point>> polygons;
};

ContourOutline outline_from_json_text(const std::string &text, int frame_index = 0);
ContourOutline load_outline(const std::filesystem::path &path, int frame_index = 0);
std::string outline_to_json_text(const ContourOutline &outline);

struct CannyThresholds
{
    int lower = 0;
    int upper = 0;

    friend bool operator==(const CannyThresholds &, const CannyThresholds &) = default;
};

// lower = max(0, (1-sigma)*v), upper = min(255, (1+sigma)*v), truncated.
CannyThresholds auto_canny_thresholds(double median_intensity, double sigma = 0.33);

struct CbemOptions
{
    double sigma_coeff = 0.33;
    double blur_sigma = 1.4; ///< 5x5 kernel
};

// Edge map (0/255) restricted to the outline polygons.
struct Cbem
{
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> edges;
    CannyThresholds thresholds;
    double median = 0.0;

    bool edge(int x, int y) const noexcept { return edges[static_cast<std::size_t>(y) * width + x] == 255; }
    std::size_t edge_count() const noexcept;
    GrayImage image() const;
    static Cbem from_image(const GrayImage &img);
};

// Even-odd test on the pixel centre; pixels on an edge count as outside.
bool point_strictly_inside(const std::vector<Point> &polygon, Point p);

// Rounded 0.299R + 0.587G + 0.114B.
GrayImage to_gray(const Frame &frame);

Cbem build_cbem(const Frame &frame, const ContourOutline &outline, const CbemOptions &opts = {});

struct FrameEval
{
    int frame_index = 0;
    std::size_t tp = 0;
    std::size_t fn = 0;
    std::optional<double> recall; ///< nullopt when TP + FN == 0 and pixels exist
};

// TP/(TP+FN) with nullopt for 0/0.
std::optional<double> detection_rate(std::size_t tp, std::size_t fn);

// Every CBEM edge pixel is a hit when an annotated pixel lies within
// Chebyshev distance tau.
FrameEval evaluate(const Cbem &cbem, const AnnotationRecord &record, int tau = 1);

struct EvalReport
{
    int tau = 1;
    std::vector<FrameEval> frames;
    std::size_t total_tp = 0;
    std::size_t total_fn = 0;
    std::optional<double> aggregate_recall;
};

EvalReport aggregate(std::vector<FrameEval> frames, int tau);
std::string eval_report_to_json(const EvalReport &report);

struct LabeledFrame
{
    int frame_index = 0;
    bool has_marking = false;
    int peak_value = 0; ///< histogram peak of the frame's mask
};

struct AblationRow
{
    int threshold = 0;
    std::optional<double> fp_percent;
    std::optional<double> tp_percent;
};

struct AblationReport
{
    std::vector<AblationRow> rows;
    int t_optimal = 0;
};

// Whether a peak counts as a detection at threshold t (strict at t == 0).
bool detected_at(int peak_value, int threshold);

AblationReport run_ablation(const std::vector<LabeledFrame> &frames, const std::vector<int> &thresholds);

// threshold,fp_percent rows then a t_optimal line.
void write_ablation_csv(const AblationReport &report, std::ostream &out);

// frame_index,has_marking
std::vector<std::pair<int, bool>> read_labels_csv(const std::filesystem::path &path);

} // namespace alina
