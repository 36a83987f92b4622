#include "alina/config.hpp"
#include "alina/error.hpp"
#include "support/temp_dir.hpp"

#include <doctest.h>

#include <fstream>

using namespace alina;

TEST_CASE("defaults")
{
    const Config c;
    CHECK(c.pipeline.hsv.lower == Hsv{0, 70, 170});
    CHECK(c.pipeline.hsv.upper == Hsv{255, 255, 255});
    CHECK(c.pipeline.threshold == 150);
    CHECK(c.pipeline.seed_group_gap == 20);
    CHECK(c.pipeline.traversal.theta == 3);
    CHECK_FALSE(c.pipeline.traversal.disk_mode);
    CHECK(c.pipeline.overlay_color == Rgb{255, 0, 0});
    CHECK(c.pipeline.sampling == Sampling::bilinear);
    CHECK(c.eval.tau == 1);
    CHECK(c.eval.sigma == doctest::Approx(0.33));
}

TEST_CASE("every key parses")
{
    const Config c = parse_config(R"(
# comment line
hsv.lower = [0,60,160]
hsv.upper = [250, 255, 255]   # trailing comment
detect.threshold = 75
detect.seed_group_gap = 10
traversal.theta = 5
traversal.disk_mode = true
geometry.sampling = nearest
roi.dst_width = 400
roi.dst_height = 300
pipeline.roi = "data/roi.json"
pipeline.out = results
pipeline.overlay_color = [0,255,0]
eval.tau = 2
eval.sigma = 0.25
)");
    CHECK(c.pipeline.hsv.lower == Hsv{0, 60, 160});
    CHECK(c.pipeline.hsv.upper == Hsv{250, 255, 255});
    CHECK(c.pipeline.threshold == 75);
    CHECK(c.pipeline.seed_group_gap == 10);
    CHECK(c.pipeline.traversal.theta == 5);
    CHECK(c.pipeline.traversal.disk_mode);
    CHECK(c.pipeline.sampling == Sampling::nearest);
    CHECK(c.pipeline.dst_width == 400);
    CHECK(c.pipeline.dst_height == 300);
    CHECK(c.pipeline.roi_path == "data/roi.json");
    CHECK(c.pipeline.output_dir == "results");
    CHECK(c.pipeline.overlay_color == Rgb{0, 255, 0});
    CHECK(c.eval.tau == 2);
    CHECK(c.eval.sigma == doctest::Approx(0.25));
}

TEST_CASE("bad input is rejected")
{
    CHECK_THROWS_AS(parse_config("nope = 1"), Error);
    CHECK_THROWS_AS(parse_config("detect.threshold"), Error);
    CHECK_THROWS_AS(parse_config("detect.threshold = -1"), Error);
    CHECK_THROWS_AS(parse_config("detect.threshold = 1.5"), Error);
    CHECK_THROWS_AS(parse_config("traversal.theta = 0"), Error);
    CHECK_THROWS_AS(parse_config("hsv.lower = [0,70]"), Error);
    CHECK_THROWS_AS(parse_config("hsv.lower = [0,70,300]"), Error);
    CHECK_THROWS_AS(parse_config("hsv.lower = [0,80,170]\nhsv.upper = [255,70,255]"), Error);
    CHECK_THROWS_AS(parse_config("geometry.sampling = cubic"), Error);
    CHECK_THROWS_AS(parse_config("traversal.disk_mode = 1"), Error);
}

TEST_CASE("overrides and files")
{
    alina::test::TempDir dir;
    std::ofstream(dir / "a.cfg") << "traversal.theta = 4\n";
    Config c = load_config(dir / "a.cfg");
    CHECK(c.pipeline.traversal.theta == 4);
    apply_setting(c, "traversal.theta", "6");
    CHECK(c.pipeline.traversal.theta == 6);
    apply_setting(c, " eval.tau ", " 0 ");
    CHECK(c.eval.tau == 0);
    CHECK_THROWS_AS(load_config(dir / "missing.cfg"), Error);
}
