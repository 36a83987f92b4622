#include "alina/synthetic.hpp"

#include "alina/error.hpp"
#include "alina/image_io.hpp"
#include "alina/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace alina::synth
{

namespace fs = std::filesystem;

Roi default_roi() { return make_roi({Point{100, 200}, Point{540, 200}, Point{620, 470}, Point{20, 470}}); }

namespace
{

double segment_distance(Point p, Point a, Point b)
{
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

bool within_stroke(Point p, const Stroke &s)
{
    const double r = s.half_width;
    for (std::size_t i = 0; i + 1 < s.path.size(); ++i)
    {
        const Point a = s.path[i], b = s.path[i + 1];
        if (p.x < std::min(a.x, b.x) - r || p.x > std::max(a.x, b.x) + r || p.y < std::min(a.y, b.y) - r ||
            p.y > std::max(a.y, b.y) + r)
            continue;
        if (segment_distance(p, a, b) <= r)
            return true;
    }
    return false;
}

// Smooth value noise on a coarse grid plus per-pixel jitter.
Frame textured_background(const SceneSpec &spec, std::mt19937_64 &rng)
{
    const int w = spec.frame.width, h = spec.frame.height;
    constexpr int cell = 16;
    const int gw = w / cell + 2, gh = h / cell + 2;
    std::uniform_int_distribution<int> base(spec.background_lo, spec.background_hi);
    std::vector<double> grid(static_cast<std::size_t>(gw) * gh);
    for (auto &g : grid)
        g = base(rng);
    std::uniform_int_distribution<int> jitter(-spec.tint, spec.tint);
    Frame f(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
        {
            const double gx = static_cast<double>(x) / cell, gy = static_cast<double>(y) / cell;
            const int x0 = static_cast<int>(gx), y0 = static_cast<int>(gy);
            const double fx = gx - x0, fy = gy - y0;
            auto at = [&](int cx, int cy) { return grid[static_cast<std::size_t>(cy) * gw + cx]; };
            const double top = at(x0, y0) + (at(x0 + 1, y0) - at(x0, y0)) * fx;
            const double bottom = at(x0, y0 + 1) + (at(x0 + 1, y0 + 1) - at(x0, y0 + 1)) * fx;
            const int v = static_cast<int>(std::lround(top + (bottom - top) * fy));
            auto ch = [&](int d) { return static_cast<std::uint8_t>(std::clamp(v + d, 0, 255)); };
            if (spec.tint > 0)
                f.set(x, y, {ch(jitter(rng)), ch(jitter(rng)), ch(jitter(rng))});
            else
                f.set(x, y, {ch(0), ch(0), ch(0)});
        }
    return f;
}

// Left offset forward, right offset backward.
std::vector<Point> offset_polygon(const std::vector<Point> &path, double d)
{
    std::vector<Point> left, right;
    const std::size_t n = path.size();
    for (std::size_t i = 0; i < n; ++i)
    {
        const Point a = path[i == 0 ? 0 : i - 1];
        const Point b = path[i + 1 < n ? i + 1 : n - 1];
        double tx = b.x - a.x, ty = b.y - a.y;
        const double len = std::hypot(tx, ty);
        tx /= len;
        ty /= len;
        left.push_back({path[i].x - ty * d, path[i].y + tx * d});
        right.push_back({path[i].x + ty * d, path[i].y - tx * d});
    }
    std::vector<Point> poly = left;
    poly.insert(poly.end(), right.rbegin(), right.rend());
    return poly;
}

// Sutherland-Hodgman against an axis-aligned rectangle.
std::vector<Point> clip_rect(std::vector<Point> poly, double x0, double y0, double x1, double y1)
{
    auto clip = [&](auto inside, auto intersect) {
        std::vector<Point> out;
        for (std::size_t i = 0; i < poly.size(); ++i)
        {
            const Point cur = poly[i];
            const Point prev = poly[(i + poly.size() - 1) % poly.size()];
            if (inside(cur))
            {
                if (!inside(prev))
                    out.push_back(intersect(prev, cur));
                out.push_back(cur);
            }
            else if (inside(prev))
                out.push_back(intersect(prev, cur));
        }
        poly = std::move(out);
    };
    auto at_x = [](double x) {
        return [x](Point a, Point b) { return Point{x, a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x)}; };
    };
    auto at_y = [](double y) {
        return [y](Point a, Point b) { return Point{a.x + (b.x - a.x) * (y - a.y) / (b.y - a.y), y}; };
    };
    clip([&](Point p) { return p.x >= x0; }, at_x(x0));
    if (!poly.empty())
        clip([&](Point p) { return p.x <= x1; }, at_x(x1));
    if (!poly.empty())
        clip([&](Point p) { return p.y >= y0; }, at_y(y0));
    if (!poly.empty())
        clip([&](Point p) { return p.y <= y1; }, at_y(y1));
    return poly;
}

std::vector<Point> sample_curve(Point start, double length, double bend, double dir_x, int samples)
{
    // Heads up (decreasing y), bending sideways quadratically.
    std::vector<Point> pts;
    for (int k = 0; k <= samples; ++k)
    {
        const double u = static_cast<double>(k) / samples;
        pts.push_back({start.x + dir_x * bend * u * u, start.y - length * u});
    }
    return pts;
}

} // namespace

Scene render_scene(const SceneSpec &spec, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Scene scene;
    scene.frame = textured_background(spec, rng);

    const Homography dst_to_src = roi_homography(spec.roi);
    const Homography src_to_dst = dst_to_src.inverse();
    const double bw = spec.roi.dst_width, bh = spec.roi.dst_height;

    double bx0 = spec.frame.width, by0 = spec.frame.height, bx1 = 0, by1 = 0;
    for (const auto &p : spec.roi.src)
    {
        bx0 = std::min(bx0, p.x);
        by0 = std::min(by0, p.y);
        bx1 = std::max(bx1, p.x);
        by1 = std::max(by1, p.y);
    }
    constexpr int pad = 20;
    const int x0 = std::max(0, static_cast<int>(bx0) - pad), y0 = std::max(0, static_cast<int>(by0) - pad);
    const int x1 = std::min(spec.frame.width - 1, static_cast<int>(bx1) + pad);
    const int y1 = std::min(spec.frame.height - 1, static_cast<int>(by1) + pad);
    constexpr double extend = 40.0;

    std::vector<std::vector<PixelCoord>> rows(static_cast<std::size_t>(y1 - y0 + 1));
#pragma omp parallel for schedule(dynamic, 8)
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
        {
            Point q;
            try
            {
                q = map_point(src_to_dst, {static_cast<double>(x), static_cast<double>(y)});
            }
            catch (const Error &)
            {
                continue;
            }
            if (q.x < -extend || q.y < -extend || q.x > bw - 1 + extend || q.y > bh - 1 + extend)
                continue;
            for (const auto &s : spec.strokes)
                if (within_stroke(q, s))
                {
                    scene.frame.set(x, y, spec.marking_color);
                    if (spec.marking)
                        rows[static_cast<std::size_t>(y - y0)].push_back({x, y});
                    break;
                }
        }
    for (const auto &r : rows)
        scene.truth.insert(scene.truth.end(), r.begin(), r.end());
    std::sort(scene.truth.begin(), scene.truth.end());

    if (!spec.marking)
        return scene;
    constexpr double inset = 3.0;
    for (const auto &s : spec.strokes)
    {
        auto poly = clip_rect(offset_polygon(s.path, s.half_width + spec.outline_margin), inset, inset, bw - 1 - inset,
                              bh - 1 - inset);
        if (poly.size() < 3)
            continue;
        for (auto &p : poly)
            p = map_point(dst_to_src, p);
        scene.outline.polygons.push_back(std::move(poly));
    }
    return scene;
}

SceneSpec marking_scene(MarkingShape shape, std::uint64_t seed, const Roi &roi)
{
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    SceneSpec spec;
    spec.roi = roi;
    const double w = roi.dst_width, h = roi.dst_height;
    std::uniform_real_distribution<double> xpos(0.3 * w, 0.7 * w);
    std::uniform_real_distribution<double> hw(6.0, 8.0);
    std::uniform_real_distribution<double> lean(-0.08, 0.08);
    std::uniform_real_distribution<double> bend(0.25 * w, 0.4 * w);
    std::bernoulli_distribution coin(0.5);
    constexpr double over = 40.0;
    const double bottom = h - 1 + over;
    const double total = h - 1 + 2 * over;

    switch (shape)
    {
    case MarkingShape::straight: {
        const double x = xpos(rng), dx = lean(rng) * h;
        spec.strokes.push_back({{Point{x - dx / 2, bottom}, Point{x + dx / 2, -over}}, hw(rng)});
        break;
    }
    case MarkingShape::curved: {
        // Straight for the lower 60%, then bending to one side.
        const double x = xpos(rng);
        const double straight_len = over + 0.6 * (h - 1);
        Stroke s{{Point{x, bottom}}, hw(rng)};
        auto curve = sample_curve({x, bottom - straight_len}, total - straight_len, bend(rng) * 0.6,
                                  coin(rng) ? 1.0 : -1.0, 40);
        s.path.insert(s.path.end(), curve.begin(), curve.end());
        spec.strokes.push_back(std::move(s));
        break;
    }
    case MarkingShape::junction: {
        // Stem plus straight continuation, and two branches leaving at the
        // junction point.
        const double x = std::uniform_real_distribution<double>(0.4 * w, 0.6 * w)(rng);
        const double half = hw(rng);
        const Point junction{x, 0.5 * (h - 1)};
        spec.strokes.push_back({{Point{x, bottom}, Point{x, -over}}, half});
        const double b = bend(rng);
        spec.strokes.push_back({sample_curve(junction, junction.y + over, b, -1.0, 40), half});
        spec.strokes.push_back({sample_curve(junction, junction.y + over, b, 1.0, 40), half});
        break;
    }
    }
    return spec;
}

SceneSpec noise_scene(int blob_height, std::uint64_t seed, const Roi &roi)
{
    std::mt19937_64 rng(seed ^ 0x51ed2701f3a5c0deULL);
    SceneSpec spec;
    spec.roi = roi;
    spec.tint = 0;
    spec.marking = false;
    if (blob_height <= 0)
        return spec;
    const double w = roi.dst_width, h = roi.dst_height;
    std::uniform_int_distribution<int> count(1, 3);
    std::uniform_real_distribution<double> ys(0.15 * h + blob_height / 2.0, 0.85 * h - blob_height / 2.0);
    const int n = count(rng);
    // One blob per horizontal bin so no two blobs share a column.
    const double bin = 0.8 * w / n;
    for (int k = 0; k < n; ++k)
    {
        // Capsule whose total vertical extent is blob_height.
        const double hwid = 4.0;
        std::uniform_real_distribution<double> xs(0.1 * w + k * bin + 2 * hwid, 0.1 * w + (k + 1) * bin - 2 * hwid);
        const double cx = xs(rng), cy = ys(rng);
        const double half_len = std::max(0.0, blob_height / 2.0 - hwid);
        spec.strokes.push_back({{Point{cx, cy - half_len}, Point{cx, cy + half_len}}, hwid});
    }
    return spec;
}

BinaryMask sparse_line_mask(int width, int height, double white_fraction, int lines, std::uint64_t seed)
{
    if (lines < 1 || white_fraction <= 0)
        throw Error(Errc::invalid_argument, "sparse mask needs >= 1 line and a positive fraction");
    std::mt19937_64 rng(seed);
    BinaryMask mask(width, height);
    const int band = std::max(1, static_cast<int>(std::floor(white_fraction * width / lines)));
    std::uniform_real_distribution<double> slope(-0.1, 0.1);
    for (int l = 0; l < lines; ++l)
    {
        const double x0 = (l + 0.5) * width / lines;
        const double s = slope(rng);
        for (int y = 0; y < height; ++y)
        {
            const int left = static_cast<int>(std::floor(x0 + s * (y - height / 2.0))) - band / 2;
            for (int x = left; x < left + band; ++x)
                if (x >= 0 && x < width)
                    mask.set(x, y, true);
        }
    }
    return mask;
}

void write_sequence(const std::vector<Scene> &scenes, const fs::path &dir)
{
    fs::create_directories(dir / "outlines");
    fs::create_directories(dir / "truth");
    for (std::size_t i = 0; i < scenes.size(); ++i)
    {
        const int index = static_cast<int>(i);
        write_png(scenes[i].frame, dir / frame_file_name(index, "png"));
        if (!scenes[i].outline.polygons.empty())
        {
            std::ofstream out(dir / "outlines" / frame_file_name(index, "json"));
            out << outline_to_json_text(scenes[i].outline) << '\n';
        }
        AnnotationRecord r;
        r.present = !scenes[i].truth.empty();
        r.pixels = scenes[i].truth;
        write_coords(r, dir / "truth" / frame_file_name(index, "txt"));
    }
}

} // namespace alina::synth
