// Acceptance gate: one PASS/FAIL line per primary criterion. Exit status is
// the number of failed criteria.
#include "alina/eval.hpp"
#include "alina/geometry.hpp"
#include "alina/image_io.hpp"
#include "alina/pipeline.hpp"
#include "alina/synthetic.hpp"
#include "alina/traversal.hpp"
#include "support/oracles.hpp"
#include "support/random_quads.hpp"
#include "support/temp_dir.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace alina;
namespace fs = std::filesystem;

namespace
{

// Pinned tolerances and budgets.
constexpr double residual_tol_px = 1e-9;
constexpr double inverse_tol_px = 1e-6;
constexpr int homography_pairs = 1000;
constexpr double homography_budget_s = 5.0;

constexpr int oracle_masks = 500;
constexpr int oracle_max_side = 64;
constexpr double oracle_budget_s = 30.0;

constexpr int gap_max = 10;
constexpr double gap_budget_s = 1.0;

constexpr int bench_width = 1920;
constexpr int bench_height = 1080;
constexpr double bench_white_fraction = 0.01;
constexpr int bench_masks = 5;
constexpr int bench_runs = 30;
constexpr double bench_visit_share = 0.05;

constexpr int recall_frames = 100;
constexpr double recall_min = 0.97;
constexpr int recall_tau = 1;
constexpr double recall_budget_s = 60.0;

constexpr int ablation_markings = 30;
constexpr int ablation_noise = 30;

constexpr double recall_expected = 0.98450;
constexpr double recall_tol = 5e-6;

constexpr double timing_sum_tol = 0.01;

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0)
{
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

int failures = 0;

void report(bool ok, const std::string &name, const std::string &detail)
{
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
    if (!ok)
        ++failures;
}

std::string fmt(const char *f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

void homography_suite()
{
    const auto t0 = clock_type::now();
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_residual = 0, worst_inverse = 0;
    for (int n = 0; n < homography_pairs; ++n)
    {
        const auto src = test::random_quad(rng);
        const auto dst = test::random_quad(rng);
        const Homography h = compute_homography(src, dst);
        for (int k = 0; k < 4; ++k)
            worst_residual = std::max(worst_residual, dist(map_point(h, dst[k]), src[k]));
        const Homography inv = h.inverse();
        for (int k = 0; k < 4; ++k)
        {
            // Points inside the destination quad's bounding box.
            const Point p{100 + 440 * u(rng), 80 + 320 * u(rng)};
            worst_inverse = std::max(worst_inverse, dist(map_point(inv, map_point(h, p)), p));
        }
    }
    const double s = seconds_since(t0);
    report(worst_residual < residual_tol_px && worst_inverse < inverse_tol_px && s < homography_budget_s,
           "homography suite",
           fmt("%d pairs, max residual %.3e px (< %.0e), max inverse round trip %.3e px (< %.0e), %.2f s (< %.0f s)",
               homography_pairs, worst_residual, residual_tol_px, worst_inverse, inverse_tol_px, s,
               homography_budget_s));
}

void oracle_equivalence()
{
    const auto t0 = clock_type::now();
    std::mt19937_64 rng(77);
    const int thetas[] = {1, 2, 3, 5};
    int agree = 0, cases = 0;
    while (cases < oracle_masks)
    {
        const int w = 5 + static_cast<int>(rng() % (oracle_max_side - 4));
        const int h = 5 + static_cast<int>(rng() % (oracle_max_side - 4));
        const double density = 0.01 + 0.25 * static_cast<double>(rng() % 1000) / 1000.0;
        std::bernoulli_distribution on(density);
        BinaryMask m(w, h);
        std::vector<PixelCoord> whites;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (on(rng))
                {
                    m.set(x, y, true);
                    whites.push_back({x, y});
                }
        if (whites.empty())
            continue;
        const int theta = thetas[cases % 4];
        const PixelCoord seed = whites[rng() % whites.size()];
        const auto got = circledat(m, seed, {theta, false});
        const std::set<PixelCoord> s(got.pixels.begin(), got.pixels.end());
        if (s == oracle::bfs_closure(m, seed, theta) && s.size() == got.pixels.size())
            ++agree;
        ++cases;
    }
    const double secs = seconds_since(t0);
    report(agree == cases && secs < oracle_budget_s, "CIRCLEDAT oracle equivalence",
           fmt("%d/%d masks equal to the BFS closure (theta in {1,2,3,5}, sides <= %d), %.2f s (< %.0f s)", agree,
               cases, oracle_max_side, secs, oracle_budget_s));
}

void gap_bridging()
{
    const auto t0 = clock_type::now();
    const int side = 2 * gap_max + 1, c = gap_max;
    int checked = 0, wrong = 0;
    for (int theta = 1; theta <= gap_max; ++theta)
        for (int dy = -gap_max; dy <= gap_max; ++dy)
            for (int dx = -gap_max; dx <= gap_max; ++dx)
            {
                const int d = std::max(std::abs(dx), std::abs(dy));
                if (d == 0)
                    continue;
                BinaryMask m(side, side);
                m.set(c, c, true);
                m.set(c + dx, c + dy, true);
                const auto r = circledat(m, {c, c}, {theta, false});
                const bool reached = std::find(r.pixels.begin(), r.pixels.end(), PixelCoord{c + dx, c + dy}) !=
                                     r.pixels.end();
                ++checked;
                if (reached != (d <= theta))
                    ++wrong;
            }
    const double s = seconds_since(t0);
    report(wrong == 0 && s < gap_budget_s, "gap-bridging law",
           fmt("%d two-pixel masks (d, theta <= %d), %d violations of reach iff d <= theta, %.3f s (< %.0f s)", checked,
               gap_max, wrong, s, gap_budget_s));
}

void complexity_contrast()
{
    std::vector<BinaryMask> masks;
    double max_fraction = 0;
    for (int i = 0; i < bench_masks; ++i)
    {
        masks.push_back(synth::sparse_line_mask(bench_width, bench_height, bench_white_fraction, 3, 500 + i));
        max_fraction = std::max(max_fraction, double(masks.back().count_white()) / (double(bench_width) * bench_height));
    }
    BenchmarkOptions opts;
    opts.runs = bench_runs;
    const BenchmarkReport r = benchmark_traversal(masks, {3, false}, opts);
    const auto &sw = r.rows[0];
    const auto &cd = r.rows[1];
    const double share = double(cd.visits) / double(sw.visits);
    std::ostringstream csv;
    write_benchmark_csv(r, csv);
    const bool columns = csv.str().rfind("algorithm,complexity,median_ms,visits\n", 0) == 0 && r.rows.size() == 2 &&
                         sw.algorithm == "SW Search" && sw.complexity == "O(m x n)" && cd.algorithm == "CIRCLEDAT" &&
                         cd.complexity == "O(k)";
    report(max_fraction <= bench_white_fraction && share < bench_visit_share && cd.median_ms < sw.median_ms &&
               columns,
           "complexity contrast",
           fmt("%dx%d, %d masks, white <= %.2f%%, CIRCLEDAT visits %.3f%% of W*H (< %.0f%%), median %.3f ms vs SW "
               "%.3f ms over %d runs, report columns %s",
               bench_width, bench_height, bench_masks, 100 * max_fraction, 100 * share, 100 * bench_visit_share,
               cd.median_ms, sw.median_ms, bench_runs, columns ? "ok" : "wrong"));
}

std::vector<synth::Scene> marking_scenes(int n, std::uint64_t base)
{
    const synth::MarkingShape shapes[] = {synth::MarkingShape::straight, synth::MarkingShape::curved,
                                          synth::MarkingShape::junction};
    std::vector<synth::Scene> scenes(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        scenes[i] = synth::render_scene(synth::marking_scene(shapes[i % 3], base + i), base + i);
    return scenes;
}

struct RecallRun
{
    test::TempDir dir;
    fs::path seq_dir;
    std::vector<synth::Scene> scenes;
};

void synthetic_recall(RecallRun &run)
{
    const auto t0 = clock_type::now();
    run.scenes = marking_scenes(recall_frames, 1000);
    run.seq_dir = run.dir / "seq";
    synth::write_sequence(run.scenes, run.seq_dir);
    const FrameSequence seq = load_sequence(run.seq_dir, std::string("synthetic"));
    PipelineConfig cfg;
    cfg.output_dir = run.dir / "out";
    run_sequence(seq, synth::default_roi(), cfg);

    std::vector<FrameEval> rows;
    for (int i = 0; i < recall_frames; ++i)
    {
        const Cbem cbem = build_cbem(run.scenes[i].frame, run.scenes[i].outline);
        AnnotationRecord rec;
        rec.frame_index = i;
        rec.pixels = read_coords(sequence_outputs(cfg.output_dir, "synthetic").coords(i));
        rec.present = !rec.pixels.empty();
        rows.push_back(evaluate(cbem, rec, recall_tau));
    }
    const EvalReport r = aggregate(rows, recall_tau);
    const double s = seconds_since(t0);
    const double recall = r.aggregate_recall.value_or(0.0);
    report(recall >= recall_min && s < recall_budget_s, "synthetic end-to-end recall",
           fmt("%d frames (straight/curved/junction), recall %.5f (>= %.2f) at tau=%d, TP=%zu FN=%zu, %.1f s (< %.0f "
               "s)",
               recall_frames, recall, recall_min, recall_tau, r.total_tp, r.total_fn, s, recall_budget_s));
}

void ablation_monotonicity()
{
    const Roi roi = synth::default_roi();
    const FrameAnnotator annotator(roi, PipelineConfig{}, {640, 480});
    std::vector<LabeledFrame> frames;
    const auto markings = marking_scenes(ablation_markings, 5000);
    for (int i = 0; i < ablation_markings; ++i)
        frames.push_back({i, true, annotator.analyze(markings[i].frame).histogram.peak()});
    const int heights[] = {0, 40, 110};
    int max_noise_peak = 0;
    for (int i = 0; i < ablation_noise; ++i)
    {
        const std::uint64_t s = 9000 + i;
        const auto sc = synth::render_scene(synth::noise_scene(heights[i % 3], s), s);
        const int peak = annotator.analyze(sc.frame).histogram.peak();
        max_noise_peak = std::max(max_noise_peak, peak);
        frames.push_back({ablation_markings + i, false, peak});
    }
    const AblationReport r = run_ablation(frames, {0, 75, 150});
    const double fp0 = r.rows[0].fp_percent.value_or(-1), fp75 = r.rows[1].fp_percent.value_or(-1),
                 fp150 = r.rows[2].fp_percent.value_or(-1);
    report(fp0 > fp75 && fp75 >= fp150 && fp150 == 0.0 && max_noise_peak < 150, "ablation monotonicity",
           fmt("%d marking + %d noise frames, FP%% T=0 %.2f > T=75 %.2f >= T=150 %.2f == 0, max noise peak %d (< 150), "
               "t_optimal %d",
               ablation_markings, ablation_noise, fp0, fp75, fp150, max_noise_peak, r.t_optimal));
}

void auto_canny()
{
    const auto a = auto_canny_thresholds(100, 0.33);
    const auto b = auto_canny_thresholds(240, 0.33);
    report(a == CannyThresholds{67, 133} && b == CannyThresholds{160, 255}, "auto-Canny thresholds",
           fmt("(100, 0.33) -> (%d,%d) expect (67,133); (240, 0.33) -> (%d,%d) expect (160,255)", a.lower, a.upper,
               b.lower, b.upper));
}

void recall_arithmetic()
{
    const double r = detection_rate(127, 2).value_or(-1);
    Cbem empty;
    empty.width = empty.height = 8;
    empty.edges.assign(64, 0);
    Cbem some = empty;
    some.edges[9] = some.edges[18] = 255;
    AnnotationRecord none;
    AnnotationRecord one;
    one.present = true;
    one.pixels = {{5, 5}};
    const auto both_empty = evaluate(empty, none, 1);
    const auto no_annotation = evaluate(some, none, 1);
    const auto no_edges = evaluate(empty, one, 1);
    const bool edge_cases = both_empty.recall == 1.0 && no_annotation.recall == 0.0 && no_annotation.fn == 2 &&
                            !no_edges.recall.has_value();
    report(std::abs(r - recall_expected) <= recall_tol && edge_cases, "recall arithmetic",
           fmt("TP=127 FN=2 -> %.6f (%.5f +- %.0e); empty CBEM + empty annotation -> 1.0, empty annotation -> 0.0, "
               "empty CBEM with pixels -> undefined: %s",
               r, recall_expected, recall_tol, edge_cases ? "ok" : "wrong"));
}

// Drops every timing_ms field before comparing summaries.
std::string summary_without_timing(const fs::path &p)
{
    auto j = nlohmann::json::parse(slurp(p));
    j.erase("timing_ms");
    return j.dump();
}

void determinism(const RecallRun &run)
{
    const FrameSequence seq = load_sequence(run.seq_dir, std::string("synthetic"));
    PipelineConfig a;
    a.output_dir = run.dir / "det_a";
    PipelineConfig b;
    b.output_dir = run.dir / "det_b";
    run_sequence(seq, synth::default_roi(), a);
    run_sequence(seq, synth::default_roi(), b);
    const auto oa = sequence_outputs(a.output_dir, "synthetic"), ob = sequence_outputs(b.output_dir, "synthetic");
    int differing = 0;
    for (int i = 0; i < seq.frame_count(); ++i)
    {
        if (slurp(oa.coords(i)) != slurp(ob.coords(i)))
            ++differing;
        if (slurp(oa.overlay(i)) != slurp(ob.overlay(i)))
            ++differing;
    }
    const bool summary_same = summary_without_timing(oa.summary()) == summary_without_timing(ob.summary());
    report(differing == 0 && summary_same, "determinism",
           fmt("two runs over %d frames: %d differing coordinate/overlay files, summary (without timing) %s",
               seq.frame_count(), differing, summary_same ? "identical" : "differs"));
}

void timing_report(const RecallRun &run)
{
    const auto j = nlohmann::json::parse(slurp(sequence_outputs(run.dir / "out", "synthetic").summary()));
    const auto &t = j["timing_ms"];
    std::vector<std::string> keys;
    double sum = 0;
    for (auto it = t.begin(); it != t.end(); ++it)
    {
        keys.push_back(it.key());
        if (it.key() != "total")
            sum += it.value().get<double>();
    }
    std::vector<std::string> expected(stage_names.begin(), stage_names.end());
    expected.push_back("total");
    std::sort(keys.begin(), keys.end());
    std::sort(expected.begin(), expected.end());
    const double total = t.value("total", -1.0);
    const double rel = sum > 0 ? std::abs(total - sum) / sum : 1.0;
    report(keys == expected && rel <= timing_sum_tol, "timing report",
           fmt("rows %s, total %.4f ms vs stage sum %.4f ms (relative difference %.2e <= %.0e)",
               keys == expected ? "= six stages + total" : "wrong", total, sum, rel, timing_sum_tol));
}

} // namespace

int main()
{
    auto guarded = [](const char *name, const std::function<void()> &fn) {
        try
        {
            fn();
        }
        catch (const std::exception &e)
        {
            report(false, name, std::string("exception: ") + e.what());
        }
    };
    guarded("homography suite", homography_suite);
    guarded("CIRCLEDAT oracle equivalence", oracle_equivalence);
    guarded("gap-bridging law", gap_bridging);
    guarded("complexity contrast", complexity_contrast);
    RecallRun run;
    guarded("synthetic end-to-end recall", [&] { synthetic_recall(run); });
    guarded("ablation monotonicity", ablation_monotonicity);
    guarded("auto-Canny thresholds", auto_canny);
    guarded("recall arithmetic", recall_arithmetic);
    guarded("determinism", [&] { determinism(run); });
    guarded("timing report", [&] { timing_report(run); });
    std::cout << (failures == 0 ? "ALL PASS" : "FAILURES: " + std::to_string(failures)) << std::endl;
    return failures;
}
