#include "alina/detect.hpp"
#include "alina/error.hpp"
#include "alina/synthetic.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace alina;

namespace
{

BinaryMask columns(int w, int h, std::initializer_list<int> cols)
{
    BinaryMask m(w, h);
    for (int c : cols)
        for (int y = 0; y < h; ++y)
            m.set(c, y, true);
    return m;
}

// Brute force: group columns, centroid over the group's white pixels, nearest
// white pixel with (distance, y, x) ordering.
std::vector<PixelCoord> seed_oracle(const BinaryMask &m, const std::vector<int> &peaks, int gap)
{
    std::vector<std::vector<int>> groups;
    for (int c : peaks)
    {
        if (groups.empty() || c - groups.back().back() > gap)
            groups.emplace_back();
        groups.back().push_back(c);
    }
    std::vector<PixelCoord> seeds;
    for (const auto &g : groups)
    {
        double sx = 0, sy = 0, n = 0;
        for (int c : g)
            for (int y = 0; y < m.height(); ++y)
                if (m.white(c, y))
                {
                    sx += c;
                    sy += y;
                    n += 1;
                }
        const double cx = sx / n, cy = sy / n;
        PixelCoord best{-1, -1};
        double best_d = 1e300;
        for (int c : g)
            for (int y = 0; y < m.height(); ++y)
            {
                if (!m.white(c, y))
                    continue;
                const double d = (c - cx) * (c - cx) + (y - cy) * (y - cy);
                if (d < best_d || (d == best_d && (y < best.y || (y == best.y && c < best.x))))
                {
                    best_d = d;
                    best = {c, y};
                }
            }
        seeds.push_back(best);
    }
    return seeds;
}

} // namespace

TEST_CASE("vertical_histogram examples")
{
    BinaryMask m(4, 3);
    m.set(1, 0, true);
    m.set(1, 2, true);
    m.set(3, 1, true);
    CHECK(vertical_histogram(m).counts == std::vector<int>{0, 2, 0, 1});
    CHECK(vertical_histogram(BinaryMask(6, 2)).counts == std::vector<int>(6, 0));

    BinaryMask all(5, 7);
    for (auto &b : all.bytes())
        b = 255;
    CHECK(vertical_histogram(all).counts == std::vector<int>{7, 7, 7, 7, 7});
}

TEST_CASE("histogram conserves the white count")
{
    std::mt19937 rng(2);
    for (int n = 0; n < 50; ++n)
    {
        BinaryMask m(1 + rng() % 300, 1 + rng() % 200);
        for (auto &b : m.bytes())
            b = (rng() % 7 == 0) ? 255 : 0;
        const auto h = vertical_histogram(m);
        long long sum = 0;
        for (int c : h.counts)
        {
            REQUIRE(c >= 0);
            REQUIRE(c <= m.height());
            sum += c;
        }
        REQUIRE(sum == static_cast<long long>(m.count_white()));
        CHECK(h.mask_dims == Dims{m.width(), m.height()});
    }
}

TEST_CASE("decide_presence boundaries")
{
    VerticalHistogram h{{0, 150, 3}, {3, 200}};
    auto d = decide_presence(h, 150);
    CHECK(d.present);
    CHECK(d.peak_value == 150);
    CHECK(d.peak_columns == std::vector<int>{1});

    h.counts[1] = 149;
    CHECK_FALSE(decide_presence(h, 150).present);

    VerticalHistogram one{{0, 1, 0}, {3, 1}};
    CHECK(decide_presence(one, 0).present);
    CHECK(decide_presence(one, 0).peak_columns == std::vector<int>{1});

    VerticalHistogram black{{0, 0, 0}, {3, 1}};
    CHECK_FALSE(decide_presence(black, 0).present);
    CHECK(decide_presence(black, 0).peak_columns.empty());

    CHECK_THROWS_AS(decide_presence(one, -1), Error);
}

TEST_CASE("presence is monotone in the threshold")
{
    std::mt19937 rng(5);
    for (int n = 0; n < 100; ++n)
    {
        VerticalHistogram h;
        h.counts.resize(20);
        for (auto &c : h.counts)
            c = static_cast<int>(rng() % 300);
        for (int t = 0; t < 320; t += 7)
            if (decide_presence(h, t).present)
                for (int u = 0; u <= t; u += 3)
                    REQUIRE(decide_presence(h, u).present);
    }
}

TEST_CASE("single column seed follows the tie rule")
{
    // Centroid row 99.5 is equidistant from rows 99 and 100; the smaller y wins.
    const BinaryMask m = columns(20, 200, {5});
    const auto d = decide_presence(vertical_histogram(m), 150);
    REQUIRE(d.present);
    const auto s = extract_seeds(m, d);
    REQUIRE(s.seeds.size() == 1);
    CHECK(s.seeds[0] == PixelCoord{5, 99});
    CHECK(s.seeds == seed_oracle(m, d.peak_columns, 20));
}

TEST_CASE("seed grouping")
{
    const BinaryMask far = columns(400, 200, {5, 300});
    const auto d1 = decide_presence(vertical_histogram(far), 150);
    CHECK(extract_seeds(far, d1).seeds.size() == 2);

    const BinaryMask run = columns(40, 200, {5, 6, 7});
    const auto d2 = decide_presence(vertical_histogram(run), 150);
    const auto s2 = extract_seeds(run, d2);
    REQUIRE(s2.seeds.size() == 1);
    CHECK(s2.seeds[0] == PixelCoord{6, 99});

    const BinaryMask near = columns(60, 200, {5, 25, 46});
    const auto d3 = decide_presence(vertical_histogram(near), 150);
    CHECK(extract_seeds(near, d3, 20).seeds.size() == 2);
    CHECK(extract_seeds(near, d3, 21).seeds.size() == 1);
}

TEST_CASE("seeds match the brute-force oracle and lie on white pixels")
{
    std::mt19937 rng(8);
    for (int n = 0; n < 100; ++n)
    {
        BinaryMask m(80, 60);
        const int strokes = 1 + static_cast<int>(rng() % 4);
        for (int s = 0; s < strokes; ++s)
        {
            const int x0 = static_cast<int>(rng() % 80);
            const int slope = static_cast<int>(rng() % 5) - 2;
            for (int y = 0; y < 60; ++y)
            {
                const int x = x0 + slope * y / 10;
                if (x >= 0 && x < 80 && rng() % 10 != 0)
                    m.set(x, y, true);
            }
        }
        const int t = static_cast<int>(rng() % 40) + 1;
        const int gap = static_cast<int>(rng() % 25);
        const auto d = decide_presence(vertical_histogram(m), t);
        if (!d.present)
            continue;
        const auto s = extract_seeds(m, d, gap);
        REQUIRE(s.seeds == seed_oracle(m, d.peak_columns, gap));
        for (const auto &p : s.seeds)
            REQUIRE(m.white(p.x, p.y));
    }
}

TEST_CASE("extract_seeds requires presence")
{
    const BinaryMask m(5, 5);
    const auto d = decide_presence(vertical_histogram(m), 150);
    try
    {
        extract_seeds(m, d);
        FAIL("expected precondition error");
    }
    catch (const Error &e)
    {
        CHECK(e.code() == Errc::precondition);
    }
}

TEST_CASE("hsv frequency profile")
{
    HsvRoi r(3, 2);
    r.v.data = {170, 200, 255, 10, 10, 10};
    r.s.data = {80, 80, 90, 0, 0, 0};
    BinaryMask m(3, 2);
    m.set(0, 0, true);
    m.set(1, 0, true);
    m.set(2, 0, true);
    const HsvProfile p = hsv_frequency_profile({r}, {m});
    CHECK(p.v()[170] == 1);
    CHECK(p.v()[200] == 1);
    CHECK(p.v()[255] == 1);
    CHECK(p.v()[10] == 0);
    CHECK(p.s()[80] == 2);
    CHECK(p.h()[0] == 3);

    const HsvProfile empty = hsv_frequency_profile({r}, {BinaryMask(3, 2)});
    for (const auto &ch : empty.bins)
        for (auto c : ch)
            REQUIRE(c == 0);

    CHECK_THROWS_AS(hsv_frequency_profile({r}, {BinaryMask(2, 2)}), Error);
    CHECK_THROWS_AS(hsv_frequency_profile({r, r}, {m}), Error);

    std::ostringstream csv;
    write_profile_csv(p, csv);
    const std::string text = csv.str();
    CHECK(text.rfind("channel,bin,count\n", 0) == 0);
    CHECK(text.find("V,200,1\n") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 3 * 256);
}

TEST_CASE("synthetic yellow marking has saturation mass above 70")
{
    const Roi roi = synth::default_roi();
    const synth::Scene sc = synth::render_scene(synth::marking_scene(synth::MarkingShape::straight, 3, roi), 3);
    // Marking mask from the ground truth, carried into bird's-eye space.
    const Homography src_to_dst = roi_homography(roi).inverse();
    BinaryMask m(roi.dst_width, roi.dst_height);
    HsvRoi h(roi.dst_width, roi.dst_height);
    for (const auto &p : sc.truth)
    {
        const Point q = map_point(src_to_dst, {double(p.x), double(p.y)});
        const int x = static_cast<int>(std::lround(q.x)), y = static_cast<int>(std::lround(q.y));
        if (x < 0 || y < 0 || x >= roi.dst_width || y >= roi.dst_height)
            continue;
        m.set(x, y, true);
        const Hsv v = rgb_to_hsv(sc.frame.at(p.x, p.y));
        h.h.at(x, y) = v.h;
        h.s.at(x, y) = v.s;
        h.v.at(x, y) = v.v;
    }
    const HsvProfile p = hsv_frequency_profile({h}, {m});
    std::uint64_t total = 0, above = 0;
    for (int b = 0; b < 256; ++b)
    {
        total += p.s()[b];
        if (b >= 70)
            above += p.s()[b];
    }
    REQUIRE(total > 1000);
    CHECK(double(above) / double(total) >= 0.99);
}
