#include "alina/cli.hpp"

#include "alina/config.hpp"
#include "alina/error.hpp"
#include "alina/eval.hpp"
#include "alina/image_io.hpp"
#include "alina/pipeline.hpp"
#include "alina/service.hpp"
#include "alina/synthetic.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>
#include <sstream>

namespace alina
{

namespace fs = std::filesystem;

namespace
{

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_runtime = 2;

// Flags shared by every subcommand that touches the pipeline configuration.
struct CommonFlags
{
    std::string config;
    std::vector<std::string> sets;
    std::optional<int> threshold;
    std::optional<int> theta;
    std::optional<int> gap;
    std::optional<int> tau;
    bool disk_mode = false;

    void attach(CLI::App *app)
    {
        app->add_option("--config", config, "key = value config file")->check(CLI::ExistingFile);
        app->add_option("--set", sets, "override one config key, e.g. --set traversal.theta=5");
        app->add_option("--threshold", threshold, "presence threshold (detect.threshold)");
        app->add_option("--theta", theta, "traversal reach (traversal.theta)");
        app->add_option("--gap", gap, "seed group gap (detect.seed_group_gap)");
        app->add_option("--tau", tau, "evaluation tolerance in pixels (eval.tau)");
        app->add_flag("--disk", disk_mode, "use the disk neighbourhood (traversal.disk_mode)");
    }

    Config resolve() const
    {
        Config cfg = config.empty() ? Config{} : load_config(config);
        for (const auto &s : sets)
        {
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw Error(Errc::invalid_argument, "--set expects key=value, got: " + s);
            apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
        }
        if (threshold)
            cfg.pipeline.threshold = *threshold;
        if (theta)
            cfg.pipeline.traversal.theta = *theta;
        if (gap)
            cfg.pipeline.seed_group_gap = *gap;
        if (tau)
            cfg.eval.tau = *tau;
        if (disk_mode)
            cfg.pipeline.traversal.disk_mode = true;
        return cfg;
    }
};

std::optional<int> index_from_name(const fs::path &p, const std::string &ext)
{
    static const std::regex re(R"(frame_(\d{6,})\.(\w+))");
    std::smatch m;
    const std::string name = p.filename().string();
    if (!std::regex_match(name, m, re) || m[2].str() != ext)
        return std::nullopt;
    return std::stoi(m[1].str());
}

std::map<int, fs::path> indexed_files(const fs::path &dir, const std::string &ext)
{
    if (!fs::is_directory(dir))
        throw Error(Errc::not_found, "directory not found: " + dir.string());
    std::map<int, fs::path> out;
    for (const auto &e : fs::directory_iterator(dir))
        if (auto i = index_from_name(e.path(), ext))
            out[*i] = e.path();
    return out;
}

void write_text(const fs::path &path, const std::string &text)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw Error(Errc::io_failed, "cannot write " + path.string());
    f << text;
}

// Explicit --roi, then the config's pipeline.roi, then the ROI stored for
// the sequence under the output root.
std::optional<Roi> find_roi(const std::string &roi_flag, const Config &cfg, const fs::path &out_root,
                            const std::string &seq_id, std::string &looked_at)
{
    if (!roi_flag.empty())
        return load_roi(roi_flag);
    if (!cfg.pipeline.roi_path.empty())
        return load_roi(cfg.pipeline.roi_path);
    const fs::path stored = out_root / seq_id / "roi.json";
    looked_at = stored.string();
    if (fs::is_regular_file(stored))
        return load_roi(stored);
    return std::nullopt;
}

Roi require_roi(const std::string &roi_flag, const Config &cfg, const fs::path &out_root, const FrameSequence &seq)
{
    std::string looked_at;
    auto roi = find_roi(roi_flag, cfg, out_root, seq.id(), looked_at);
    if (!roi)
        throw Error(Errc::invalid_roi,
                    "missing ROI for sequence '" + seq.id() + "': pass --roi or store one at " + looked_at);
    effective_roi(*roi, cfg.pipeline, seq.frame_dims());
    return *roi;
}

std::string fixed(double v, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::vector<int> parse_int_list(const std::string &text)
{
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        try
        {
            std::size_t used = 0;
            out.push_back(std::stoi(item, &used));
            if (used != item.size())
                throw std::invalid_argument(item);
        }
        catch (const std::exception &)
        {
            throw Error(Errc::invalid_argument, "not an integer list: " + text);
        }
    }
    if (out.empty())
        throw Error(Errc::invalid_argument, "empty threshold list");
    return out;
}

BinaryMask mask_from_gray(const GrayImage &g)
{
    BinaryMask m(g.width, g.height);
    for (std::size_t i = 0; i < g.data.size(); ++i)
        m.bytes()[i] = g.data[i] > 127 ? 255 : 0;
    return m;
}

} // namespace

int cli_run(const std::vector<std::string> &args) { return cli_run(args, std::cout, std::cerr); }

int cli_run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Line marking annotation pipeline", "alina"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    CommonFlags common;
    std::string seq_dir, roi_path, out_dir = "out", id, report;

    auto *ingest = app.add_subcommand("ingest", "register a frame sequence under the output root");
    ingest->add_option("--seq", seq_dir, "frame directory")->required();
    ingest->add_option("--out", out_dir, "output root");
    ingest->add_option("--id", id, "sequence id (default: directory name)");
    ingest->add_option("--roi", roi_path, "ROI JSON to validate and store");

    auto *run = app.add_subcommand("run", "annotate every frame of a sequence");
    run->add_option("--seq", seq_dir, "frame directory")->required();
    run->add_option("--roi", roi_path, "ROI JSON");
    run->add_option("--out", out_dir, "output root");
    run->add_option("--id", id, "sequence id (default: directory name)");
    common.attach(run);

    std::string cbem_dir, outlines_dir, coords_dir;
    auto *eval = app.add_subcommand("eval", "recall of annotations against CBEM edge maps");
    eval->add_option("--coords-dir", coords_dir, "annotation coordinate files")->required();
    eval->add_option("--cbem-dir", cbem_dir, "CBEM edge PNGs (read, or written when --outlines-dir is given)");
    eval->add_option("--outlines-dir", outlines_dir, "outline JSON files; CBEMs are built from --seq frames");
    eval->add_option("--seq", seq_dir, "frame directory (with --outlines-dir)");
    eval->add_option("--report", report, "report JSON path")->default_str("eval_report.json");
    common.attach(eval);

    std::string labels, thresholds = "0,75,150";
    auto *ablate = app.add_subcommand("ablate", "false-positive rate per presence threshold");
    ablate->add_option("--seq", seq_dir, "frame directory")->required();
    ablate->add_option("--roi", roi_path, "ROI JSON");
    ablate->add_option("--labels", labels, "frame_index,has_marking CSV")->required()->check(CLI::ExistingFile);
    ablate->add_option("--thresholds", thresholds, "comma-separated thresholds");
    ablate->add_option("--out", out_dir, "output root (for a stored ROI)");
    ablate->add_option("--report", report, "CSV path (default: stdout)");
    common.attach(ablate);

    std::string masks_dir;
    int runs = 30, width = 1920, height = 1080, count = 10, lines = 3, repeats = 3;
    double fraction = 0.01;
    std::uint64_t seed = 1;
    auto *bench = app.add_subcommand("bench", "CIRCLEDAT against the raster scan, or per-stage timings");
    bench->add_option("--masks-dir", masks_dir, "binary mask PNGs (default: synthetic sparse masks)");
    bench->add_option("--runs", runs, "timed runs")->check(CLI::PositiveNumber);
    bench->add_option("--width", width, "synthetic mask width")->check(CLI::PositiveNumber);
    bench->add_option("--height", height, "synthetic mask height")->check(CLI::PositiveNumber);
    bench->add_option("--count", count, "synthetic mask count")->check(CLI::PositiveNumber);
    bench->add_option("--lines", lines, "bands per synthetic mask")->check(CLI::PositiveNumber);
    bench->add_option("--white-fraction", fraction, "white share per synthetic mask")->check(CLI::Range(0.0, 1.0));
    bench->add_option("--seed", seed, "synthetic mask seed");
    bench->add_option("--seq", seq_dir, "frame directory: report per-stage timings instead");
    bench->add_option("--roi", roi_path, "ROI JSON (with --seq)");
    bench->add_option("--repeats", repeats, "passes over the sequence (with --seq)")->check(CLI::PositiveNumber);
    bench->add_option("--report", report, "CSV path (default: stdout)");
    common.attach(bench);

    auto *profile = app.add_subcommand("profile-hsv", "H, S and V frequencies under marking pixels");
    profile->add_option("--seq", seq_dir, "frame directory")->required();
    profile->add_option("--roi", roi_path, "ROI JSON");
    profile->add_option("--masks-dir", masks_dir, "bird's-eye marking masks (default: pipeline masks)");
    profile->add_option("--out", out_dir, "output root (for a stored ROI)");
    profile->add_option("--report", report, "CSV path")->default_str("hsv_profile.csv");
    common.attach(profile);

    std::string host = "127.0.0.1";
    int port = 8080;
    auto *serve = app.add_subcommand("serve", "HTTP service for the review UI");
    serve->add_option("--out", out_dir, "output root");
    serve->add_option("--host", host, "bind address");
    serve->add_option("--port", port, "port")->check(CLI::Range(0, 65535));
    common.attach(serve);

    try
    {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    }
    catch (const CLI::CallForHelp &e)
    {
        app.exit(e, out, err);
        return exit_ok;
    }
    catch (const CLI::CallForAllHelp &e)
    {
        app.exit(e, out, err);
        return exit_ok;
    }
    catch (const CLI::ParseError &e)
    {
        err << "error: " << e.what() << "\n\n" << app.help();
        return exit_usage;
    }

    try
    {
        if (ingest->parsed())
        {
            Workspace ws(out_dir);
            const auto info = ws.ingest(seq_dir, id.empty() ? std::nullopt : std::optional(id));
            if (!roi_path.empty())
            {
                const Roi roi = load_roi(roi_path);
                if (auto v = validate_roi(roi, info.dims))
                    throw Error(Errc::invalid_roi, v->message);
                ws.set_roi(info.id, roi);
            }
            out << "ingested " << info.id << ": " << info.frame_count << " frames, " << info.dims.width << "x"
                << info.dims.height << "\n";
            return exit_ok;
        }

        const Config cfg = common.resolve();

        if (run->parsed())
        {
            const FrameSequence seq = load_sequence(seq_dir, id.empty() ? std::nullopt : std::optional(id));
            const Roi roi = require_roi(roi_path, cfg, out_dir, seq);
            PipelineConfig pc = cfg.pipeline;
            pc.output_dir = out_dir;
            const RunSummary s = run_sequence(seq, roi, pc);
            out << seq.id() << ": " << s.frames_processed << "/" << s.frames_total << " frames processed, "
                << s.frames_with_marking << " with marking, " << s.frames_failed << " failed\n";
            out << "total " << fixed(s.timing.total_ms, 3) << " ms/frame; outputs in "
                << sequence_outputs(out_dir, seq.id()).root.string() << "\n";
            for (const auto &e : s.errors)
                err << e << "\n";
            return s.frames_total > 0 && s.frames_failed == s.frames_total ? exit_runtime : exit_ok;
        }

        if (eval->parsed())
        {
            if (cbem_dir.empty() && outlines_dir.empty())
                throw Error(Errc::invalid_argument, "eval needs --cbem-dir or --outlines-dir");
            std::map<int, Cbem> cbems;
            if (!outlines_dir.empty())
            {
                if (seq_dir.empty())
                    throw Error(Errc::invalid_argument, "--outlines-dir needs --seq");
                const FrameSequence seq = load_sequence(seq_dir);
                CbemOptions opts;
                opts.sigma_coeff = cfg.eval.sigma;
                for (const auto &[index, path] : indexed_files(outlines_dir, "json"))
                {
                    if (index >= seq.frame_count())
                        throw Error(Errc::not_found, "outline for missing frame " + std::to_string(index));
                    Cbem c = build_cbem(seq.frame(index), load_outline(path, index), opts);
                    if (!cbem_dir.empty())
                        write_png(c.image(), fs::path(cbem_dir) / frame_file_name(index, "png"));
                    cbems.emplace(index, std::move(c));
                }
            }
            else
            {
                for (const auto &[index, path] : indexed_files(cbem_dir, "png"))
                    cbems.emplace(index, Cbem::from_image(read_gray(path)));
            }
            if (cbems.empty())
                throw Error(Errc::not_found, "no CBEM frames found");

            std::vector<FrameEval> rows;
            for (const auto &[index, cbem] : cbems)
            {
                const fs::path coords = fs::path(coords_dir) / frame_file_name(index, "txt");
                if (!fs::is_regular_file(coords))
                    throw Error(Errc::not_found, "missing coordinate file " + coords.string());
                AnnotationRecord rec;
                rec.frame_index = index;
                rec.pixels = read_coords(coords);
                rec.present = !rec.pixels.empty();
                FrameEval fe = evaluate(cbem, rec, cfg.eval.tau);
                fe.frame_index = index;
                rows.push_back(fe);
            }
            const EvalReport r = aggregate(std::move(rows), cfg.eval.tau);
            const fs::path report_path = report.empty() ? fs::path("eval_report.json") : fs::path(report);
            write_text(report_path, eval_report_to_json(r));
            out << "aggregate recall: " << (r.aggregate_recall ? fixed(*r.aggregate_recall, 5) : "undefined")
                << " (tp=" << r.total_tp << ", fn=" << r.total_fn << ", tau=" << r.tau << ", frames=" << r.frames.size()
                << ")\n";
            out << "report: " << report_path.string() << "\n";
            return exit_ok;
        }

        if (ablate->parsed())
        {
            const FrameSequence seq = load_sequence(seq_dir);
            const Roi roi = require_roi(roi_path, cfg, out_dir, seq);
            const FrameAnnotator annotator(roi, cfg.pipeline, seq.frame_dims());
            std::vector<LabeledFrame> frames;
            for (const auto &[index, has] : read_labels_csv(labels))
            {
                if (index < 0 || index >= seq.frame_count())
                    throw Error(Errc::not_found, "label for missing frame " + std::to_string(index));
                const FrameAnalysis a = annotator.analyze(seq.frame(index));
                frames.push_back({index, has, a.histogram.peak()});
            }
            const AblationReport r = run_ablation(frames, parse_int_list(thresholds));
            std::ostringstream csv;
            write_ablation_csv(r, csv);
            if (report.empty())
                out << csv.str();
            else
            {
                write_text(report, csv.str());
                out << "t_optimal " << r.t_optimal << "; report: " << report << "\n";
            }
            return exit_ok;
        }

        if (bench->parsed())
        {
            std::ostringstream csv;
            if (!seq_dir.empty())
            {
                const FrameSequence seq = load_sequence(seq_dir);
                const Roi roi = require_roi(roi_path, cfg, out_dir, seq);
                const TimingReport t = measure_stage_timings(seq, roi, cfg.pipeline, repeats);
                csv << "stage,median_ms\n";
                for (std::size_t i = 0; i < stage_count; ++i)
                    csv << stage_names[i] << "," << fixed(t.stage_ms[i], 4) << "\n";
                csv << "total," << fixed(t.total_ms, 4) << "\n";
            }
            else
            {
                std::vector<BinaryMask> masks;
                if (!masks_dir.empty())
                {
                    for (const auto &[index, path] : indexed_files(masks_dir, "png"))
                        masks.push_back(mask_from_gray(read_gray(path)));
                    if (masks.empty())
                        throw Error(Errc::not_found, "no masks found in " + masks_dir);
                }
                else
                {
                    for (int i = 0; i < count; ++i)
                        masks.push_back(synth::sparse_line_mask(width, height, fraction, lines, seed + i));
                }
                BenchmarkOptions opts;
                opts.runs = runs;
                opts.presence_threshold = cfg.pipeline.threshold;
                opts.seed_group_gap = cfg.pipeline.seed_group_gap;
                write_benchmark_csv(benchmark_traversal(masks, cfg.pipeline.traversal, opts), csv);
            }
            if (report.empty())
                out << csv.str();
            else
            {
                write_text(report, csv.str());
                out << "report: " << report << "\n";
            }
            return exit_ok;
        }

        if (profile->parsed())
        {
            const FrameSequence seq = load_sequence(seq_dir);
            const Roi roi = require_roi(roi_path, cfg, out_dir, seq);
            const FrameAnnotator annotator(roi, cfg.pipeline, seq.frame_dims());
            HsvProfile prof;
            if (!masks_dir.empty())
            {
                for (const auto &[index, path] : indexed_files(masks_dir, "png"))
                {
                    if (index >= seq.frame_count())
                        throw Error(Errc::not_found, "mask for missing frame " + std::to_string(index));
                    const FrameAnalysis a = annotator.analyze(seq.frame(index));
                    const BinaryMask m = mask_from_gray(read_gray(path));
                    if (m.width() != a.normalized.width || m.height() != a.normalized.height)
                        throw Error(Errc::dimension_mismatch, "mask size differs from the ROI at " + path.string());
                    accumulate_profile(prof, a.normalized, m);
                }
            }
            else
            {
                for (int i = 0; i < seq.frame_count(); ++i)
                {
                    const FrameAnalysis a = annotator.analyze(seq.frame(i));
                    accumulate_profile(prof, a.normalized, a.mask);
                }
            }
            std::ostringstream csv;
            write_profile_csv(prof, csv);
            const fs::path report_path = report.empty() ? fs::path("hsv_profile.csv") : fs::path(report);
            write_text(report_path, csv.str());
            out << "report: " << report_path.string() << "\n";
            return exit_ok;
        }

        if (serve->parsed())
        {
            Service svc(out_dir, cfg);
            out << "serving " << fs::absolute(out_dir).string() << " on http://" << host << ":" << port << "\n"
                << std::flush;
            if (!svc.listen(host, port))
            {
                err << "error: cannot listen on " << host << ":" << port << "\n";
                return exit_runtime;
            }
            return exit_ok;
        }
    }
    catch (const Error &e)
    {
        err << "error: " << e.what() << "\n";
        switch (e.code())
        {
        case Errc::io_failed:
        case Errc::singular:
        case Errc::point_at_infinity:
            return exit_runtime;
        default:
            return exit_usage;
        }
    }
    catch (const std::exception &e)
    {
        err << "error: " << e.what() << "\n";
        return exit_runtime;
    }
    return exit_usage;
}

} // namespace alina
