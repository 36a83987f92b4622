#include "alina/error.hpp"
#include "alina/synthetic.hpp"
#include "alina/traversal.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

using namespace alina;

namespace
{

std::set<PixelCoord> as_set(const PixelSet &s) { return {s.pixels.begin(), s.pixels.end()}; }

BinaryMask random_mask(std::mt19937_64 &rng, int w, int h, double density)
{
    BinaryMask m(w, h);
    std::bernoulli_distribution on(density);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            m.set(x, y, on(rng));
    return m;
}

PixelCoord random_white(std::mt19937_64 &rng, const BinaryMask &m)
{
    std::vector<PixelCoord> whites;
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            if (m.white(x, y))
                whites.push_back({x, y});
    return whites[rng() % whites.size()];
}

} // namespace

TEST_CASE("offsets follow the product order without the origin")
{
    const auto o = traversal_offsets({1, false});
    const std::vector<PixelCoord> expect = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}};
    CHECK(o == expect);
    CHECK(traversal_offsets({3, false}).size() == 48);
    // Disk of radius 2: 13 lattice points minus the origin.
    CHECK(traversal_offsets({2, true}).size() == 12);
    CHECK_THROWS_AS(traversal_offsets({0, false}), Error);
}

TEST_CASE("all-black mask yields nothing")
{
    const BinaryMask m(5, 5);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x)
        {
            const auto s = circledat(m, {x, y}, {1, false});
            REQUIRE(s.pixels.empty());
            REQUIRE(s.visit_count == 1);
        }
}

TEST_CASE("lone white seed collects itself and visits its 8 neighbours")
{
    BinaryMask m(5, 5);
    m.set(2, 2, true);
    const auto s = circledat(m, {2, 2}, {1, false});
    CHECK(s.pixels == std::vector<PixelCoord>{{2, 2}});
    CHECK(s.visit_count == 9);
}

TEST_CASE("gap bridging at distance two")
{
    BinaryMask m(5, 5);
    m.set(0, 0, true);
    m.set(2, 0, true);
    CHECK(as_set(circledat(m, {0, 0}, {2, false})) == std::set<PixelCoord>{{0, 0}, {2, 0}});
    CHECK(as_set(circledat(m, {0, 0}, {1, false})) == std::set<PixelCoord>{{0, 0}});
}

TEST_CASE("C-shaped curve with a break of 3 pixels is collected whole at theta 3")
{
    BinaryMask m(60, 60);
    std::set<PixelCoord> curve;
    for (int a = 40; a <= 320; ++a)
    {
        const double t = a * 3.14159265358979 / 180.0;
        const int x = 30 + static_cast<int>(std::lround(20 * std::cos(t)));
        const int y = 30 + static_cast<int>(std::lround(20 * std::sin(t)));
        curve.insert({x, y});
    }
    std::set<PixelCoord> drawn;
    for (const auto &p : curve)
        if (!(p.x <= 12 && p.y >= 30 && p.y <= 31)) // ends of the break are 3 rows apart
        {
            m.set(p.x, p.y, true);
            drawn.insert(p);
        }
    REQUIRE(drawn.size() < curve.size());
    const PixelCoord seed = *drawn.begin();
    const auto s = circledat(m, seed, {3, false});
    CHECK(as_set(s) == drawn);
    CHECK(as_set(s) == oracle::bfs_closure(m, seed, 3));
    CHECK(as_set(circledat(m, seed, {1, false})).size() < drawn.size());
}

TEST_CASE("random masks match the BFS closure in both neighbourhood modes")
{
    std::mt19937_64 rng(21);
    for (int n = 0; n < 150; ++n)
    {
        const int w = 1 + static_cast<int>(rng() % 48), h = 1 + static_cast<int>(rng() % 48);
        const BinaryMask m = random_mask(rng, w, h, 0.02 + 0.2 * (rng() % 100) / 100.0);
        if (m.count_white() == 0)
            continue;
        const int theta = 1 + static_cast<int>(rng() % std::min({w, h, 5}));
        const bool disk = rng() % 2;
        const PixelCoord seed = random_white(rng, m);
        const auto s = circledat(m, seed, {theta, disk});
        REQUIRE(as_set(s) == oracle::bfs_closure(m, seed, theta, disk));
        REQUIRE(as_set(s).size() == s.pixels.size());
        const std::uint64_t offsets = traversal_offsets({theta, disk}).size();
        REQUIRE(s.visit_count <= std::min<std::uint64_t>(std::uint64_t(w) * h, s.pixels.size() * (offsets + 1) + 1));
    }
}

TEST_CASE("result grows with theta and is deterministic")
{
    std::mt19937_64 rng(5);
    for (int n = 0; n < 40; ++n)
    {
        const BinaryMask m = random_mask(rng, 40, 40, 0.06);
        if (m.count_white() == 0)
            continue;
        const PixelCoord seed = random_white(rng, m);
        for (int theta = 1; theta < 6; ++theta)
        {
            const auto a = as_set(circledat(m, seed, {theta, false}));
            const auto b = as_set(circledat(m, seed, {theta + 1, false}));
            REQUIRE(std::includes(b.begin(), b.end(), a.begin(), a.end()));
        }
        const auto x = circledat(m, seed, {3, false});
        const auto y = circledat(m, seed, {3, false});
        REQUIRE(x.pixels == y.pixels);
        REQUIRE(x.visit_count == y.visit_count);
    }
}

TEST_CASE("black seed inside white surroundings collects nothing")
{
    BinaryMask m(7, 7);
    for (auto &b : m.bytes())
        b = 255;
    m.set(3, 3, false);
    CHECK(circledat(m, {3, 3}, {1, false}).pixels.empty());
}

TEST_CASE("seed and theta preconditions")
{
    const BinaryMask m(5, 4);
    CHECK_THROWS_AS(circledat(m, {5, 0}, {1, false}), Error);
    CHECK_THROWS_AS(circledat(m, {0, -1}, {1, false}), Error);
    CHECK_THROWS_AS(circledat(m, {0, 0}, {5, false}), Error);
    CHECK_NOTHROW(circledat(m, {0, 0}, {4, false}));
}

TEST_CASE("circledat_multi")
{
    BinaryMask m(30, 10);
    for (int x = 0; x < 10; ++x)
        m.set(x, 2, true);
    for (int x = 20; x < 30; ++x)
        m.set(x, 7, true);
    const TraversalParams p{2, false};
    const auto one = as_set(circledat(m, {0, 2}, p));
    CHECK(as_set(circledat_multi(m, {{{0, 2}, {5, 2}}}, p)) == one);

    const auto other = as_set(circledat(m, {25, 7}, p));
    std::set<PixelCoord> both = one;
    both.insert(other.begin(), other.end());
    const auto multi = circledat_multi(m, {{{0, 2}, {25, 7}}}, p);
    CHECK(as_set(multi) == both);
    CHECK(multi.pixels.size() == both.size());

    const auto empty = circledat_multi(m, SeedSet{}, p);
    CHECK(empty.pixels.empty());
    CHECK(empty.visit_count == 0);
}

TEST_CASE("sliding window baseline")
{
    const auto black = sliding_window_collect(BinaryMask(7, 3));
    CHECK(black.pixels.empty());
    CHECK(black.visit_count == 21);

    std::mt19937_64 rng(3);
    for (int n = 0; n < 30; ++n)
    {
        const BinaryMask m = random_mask(rng, 30, 20, 0.1);
        const auto sw = sliding_window_collect(m);
        REQUIRE(sw.pixels.size() == m.count_white());
        REQUIRE(sw.visit_count == 600);
        if (m.count_white() == 0)
            continue;
        const PixelCoord seed = random_white(rng, m);
        const auto c = as_set(circledat(m, seed, {3, false}));
        const auto all = as_set(sw);
        REQUIRE(std::includes(all.begin(), all.end(), c.begin(), c.end()));
    }

    // Fully θ-connected mask: equality.
    BinaryMask line(50, 5);
    for (int x = 0; x < 50; x += 2)
        line.set(x, 2, true);
    CHECK(as_set(circledat(line, {0, 2}, {2, false})) == as_set(sliding_window_collect(line)));
}

TEST_CASE("benchmark report structure and visit bounds")
{
    std::vector<BinaryMask> masks;
    for (int i = 0; i < 3; ++i)
        masks.push_back(synth::sparse_line_mask(320, 240, 0.01, 2, 40 + i));
    BenchmarkOptions opts;
    opts.runs = 3;
    opts.presence_threshold = 100;
    const TraversalParams p{3, false};
    const auto r = benchmark_traversal(masks, p, opts);
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[0].algorithm == "SW Search");
    CHECK(r.rows[0].complexity == "O(m x n)");
    CHECK(r.rows[1].algorithm == "CIRCLEDAT");
    CHECK(r.rows[1].complexity == "O(k)");
    CHECK(r.rows[0].visits == 3ull * 320 * 240);
    std::uint64_t white = 0;
    for (const auto &m : masks)
        white += m.count_white();
    CHECK(r.rows[1].visits <= white * 49 + 3);
    CHECK(r.rows[1].visits < r.rows[0].visits / 20);

    std::ostringstream csv;
    write_benchmark_csv(r, csv);
    CHECK(csv.str().rfind("algorithm,complexity,median_ms,visits\nSW Search,O(m x n),", 0) == 0);

    BinaryMask dense(40, 30);
    for (auto &b : dense.bytes())
        b = 255;
    const auto d = circledat(dense, {0, 0}, p);
    CHECK(d.visit_count == 1200);

    CHECK_THROWS_AS(benchmark_traversal({}, p, opts), Error);
}

TEST_CASE("sparse line masks cover about the requested fraction")
{
    const BinaryMask m = synth::sparse_line_mask(1920, 1080, 0.01, 3, 1);
    const double frac = double(m.count_white()) / (1920.0 * 1080.0);
    CHECK(frac <= 0.01);
    CHECK(frac >= 0.005);
}
