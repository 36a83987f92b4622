#include "alina/cli.hpp"
#include "alina/pipeline.hpp"
#include "alina/service.hpp"
#include "alina/synthetic.hpp"
#include "support/temp_dir.hpp"

#include <doctest.h>
#include <json.hpp>

#include <fstream>
#include <sstream>

using namespace alina;
using alina::test::TempDir;
namespace fs = std::filesystem;

namespace
{

struct Result
{
    int code;
    std::string out, err;
};

Result cli(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = cli_run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Three marking frames then three marking-free frames, with outlines,
// labels and the ROI.
struct Data
{
    TempDir dir;
    fs::path seq = dir / "seq1";
    fs::path roi = dir / "roi.json";
    fs::path out = dir / "out";

    Data()
    {
        std::vector<synth::Scene> scenes;
        scenes.push_back(synth::render_scene(synth::marking_scene(synth::MarkingShape::straight, 1), 1));
        scenes.push_back(synth::render_scene(synth::marking_scene(synth::MarkingShape::curved, 2), 2));
        scenes.push_back(synth::render_scene(synth::marking_scene(synth::MarkingShape::junction, 3), 3));
        for (int h : {0, 40, 110})
            scenes.push_back(synth::render_scene(synth::noise_scene(h, 10 + h), 10 + h));
        synth::write_sequence(scenes, seq);
        save_roi(synth::default_roi(), roi);
        std::ofstream(dir / "labels.csv") << "frame_index,has_marking\n0,1\n1,1\n2,1\n3,0\n4,0\n5,0\n";
    }
};

} // namespace

TEST_CASE("usage errors exit 1 with usage text")
{
    auto r = cli({});
    CHECK(r.code == 1);
    CHECK(r.err.find("Subcommands:") != std::string::npos);

    r = cli({"frobnicate"});
    CHECK(r.code == 1);
    CHECK(r.err.find("Usage:") != std::string::npos);

    r = cli({"run", "--seq", "x", "--bogus"});
    CHECK(r.code == 1);
    CHECK(r.err.find("--bogus") != std::string::npos);

    r = cli({"run"});
    CHECK(r.code == 1);
    CHECK(r.err.find("--seq") != std::string::npos);

    r = cli({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("profile-hsv") != std::string::npos);
}

TEST_CASE("run writes the output tree and evaluates against outlines")
{
    Data d;
    auto r = cli({"run", "--seq", d.seq.string(), "--roi", d.roi.string(), "--out", d.out.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("3 with marking") != std::string::npos);
    for (int i = 0; i < 6; ++i)
    {
        CHECK(fs::is_regular_file(d.out / "seq1" / "overlays" / frame_file_name(i, "png")));
        CHECK(fs::is_regular_file(d.out / "seq1" / "coords" / frame_file_name(i, "txt")));
    }
    CHECK(fs::is_regular_file(d.out / "seq1" / "summary.json"));

    const fs::path report = d.dir / "eval.json";
    r = cli({"eval", "--coords-dir", (d.out / "seq1" / "coords").string(), "--outlines-dir",
             (d.seq / "outlines").string(), "--seq", d.seq.string(), "--cbem-dir", (d.dir / "cbem").string(),
             "--tau", "1", "--report", report.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("aggregate recall: ") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(report));
    CHECK(j["tau"] == 1);
    CHECK(j["frames"].size() == 3);
    CHECK(j["aggregate_recall"].get<double>() >= 0.9);
    CHECK(fs::is_regular_file(d.dir / "cbem" / frame_file_name(0, "png")));

    // Saved CBEM images give the same report.
    const fs::path report2 = d.dir / "eval2.json";
    r = cli({"eval", "--coords-dir", (d.out / "seq1" / "coords").string(), "--cbem-dir", (d.dir / "cbem").string(),
             "--report", report2.string()});
    CHECK(r.code == 0);
    CHECK(slurp(report) == slurp(report2));

    r = cli({"eval", "--coords-dir", (d.out / "seq1" / "coords").string()});
    CHECK(r.code == 1);
}

TEST_CASE("run without an ROI names the missing ROI")
{
    Data d;
    auto r = cli({"run", "--seq", d.seq.string(), "--out", d.out.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("missing ROI") != std::string::npos);
}

TEST_CASE("ingest stores the ROI used by later runs")
{
    Data d;
    auto r = cli({"ingest", "--seq", d.seq.string(), "--out", d.out.string(), "--roi", d.roi.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("6 frames, 640x480") != std::string::npos);
    CHECK(fs::is_regular_file(d.out / "seq1" / "sequence.json"));
    r = cli({"run", "--seq", d.seq.string(), "--out", d.out.string()});
    CHECK(r.code == 0);

    std::ofstream(d.dir / "bad_roi.json") << R"({"src": [[100,200],[540,200],[320,250],[20,470]]})";
    r = cli({"ingest", "--seq", d.seq.string(), "--out", d.out.string(), "--roi", (d.dir / "bad_roi.json").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("non-convex") != std::string::npos);
}

TEST_CASE("config file and flag overrides reach the pipeline")
{
    Data d;
    std::ofstream(d.dir / "a.cfg") << "traversal.theta = 2\npipeline.overlay_color = [0,255,0]\n";
    auto r = cli({"run", "--seq", d.seq.string(), "--roi", d.roi.string(), "--out", d.out.string(), "--config",
                  (d.dir / "a.cfg").string(), "--set", "detect.seed_group_gap=12", "--theta", "4"});
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(d.out / "seq1" / "summary.json"));
    CHECK(j["config"]["traversal.theta"] == 4);
    CHECK(j["config"]["detect.seed_group_gap"] == 12);
    CHECK(j["config"]["pipeline.overlay_color"] == nlohmann::json::array({0, 255, 0}));

    r = cli({"run", "--seq", d.seq.string(), "--roi", d.roi.string(), "--set", "no.such=1"});
    CHECK(r.code == 1);
    CHECK(r.err.find("unknown config key") != std::string::npos);
    r = cli({"run", "--seq", d.seq.string(), "--roi", d.roi.string(), "--set", "novalue"});
    CHECK(r.code == 1);
}

TEST_CASE("missing inputs are validation errors")
{
    TempDir dir;
    auto r = cli({"run", "--seq", (dir / "none").string(), "--roi", (dir / "roi.json").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("not found") != std::string::npos);
}

TEST_CASE("ablate prints the FP table")
{
    Data d;
    auto r = cli({"ablate", "--seq", d.seq.string(), "--roi", d.roi.string(), "--labels",
                  (d.dir / "labels.csv").string(), "--thresholds", "0,75,150"});
    CHECK(r.code == 0);
    CHECK(r.out == "threshold,fp_percent\n0,66.67\n75,33.33\n150,0.00\nt_optimal,150\n");

    r = cli({"ablate", "--seq", d.seq.string(), "--roi", d.roi.string(), "--labels", (d.dir / "labels.csv").string(),
             "--thresholds", "0,x"});
    CHECK(r.code == 1);
}

TEST_CASE("bench reports both collectors or the stage table")
{
    auto r = cli({"bench", "--runs", "2", "--count", "2", "--width", "320", "--height", "240"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("algorithm,complexity,median_ms,visits\nSW Search,O(m x n),", 0) == 0);
    CHECK(r.out.find("\nCIRCLEDAT,O(k),") != std::string::npos);

    Data d;
    r = cli({"bench", "--seq", d.seq.string(), "--roi", d.roi.string(), "--repeats", "1"});
    CHECK(r.code == 0);
    std::istringstream lines(r.out);
    std::vector<std::string> rows;
    for (std::string l; std::getline(lines, l);)
        rows.push_back(l.substr(0, l.find(',')));
    CHECK(rows == std::vector<std::string>{"stage", "perspective_transformation", "color_feature_normalization",
                                           "hsv_thresholding", "histogram_analysis", "circledat",
                                           "projection_remapping", "total"});
}

TEST_CASE("profile-hsv writes the frequency table")
{
    Data d;
    const fs::path report = d.dir / "hsv_profile.csv";
    auto r = cli({"profile-hsv", "--seq", d.seq.string(), "--roi", d.roi.string(), "--report", report.string()});
    CHECK(r.code == 0);
    const std::string csv = slurp(report);
    CHECK(csv.rfind("channel,bin,count\nH,0,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 769);
}

TEST_CASE("serve on a busy port exits 2")
{
    TempDir dir;
    Service busy(dir / "a", Config{});
    const int port = busy.start_background();
    REQUIRE(port > 0);
    auto r = cli({"serve", "--out", (dir / "b").string(), "--port", std::to_string(port)});
    CHECK(r.code == 2);
    busy.stop();
}
