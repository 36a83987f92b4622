#include "alina/eval.hpp"

#include "alina/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace alina
{

namespace fs = std::filesystem;

// ---------------------------------------------------------------- outlines

ContourOutline outline_from_json_text(const std::string &text, int frame_index)
{
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::exception &e)
    {
        throw Error(Errc::invalid_argument, std::string("outline JSON: ") + e.what());
    }
    auto parse_polygon = [](const nlohmann::json &arr) {
        if (!arr.is_array())
            throw Error(Errc::invalid_argument, "outline polygon must be an array of [x,y]");
        std::vector<Point> poly;
        for (const auto &v : arr)
        {
            if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
                throw Error(Errc::invalid_argument, "outline vertex is not an [x,y] pair");
            poly.push_back({v[0].get<double>(), v[1].get<double>()});
        }
        return poly;
    };
    ContourOutline out;
    out.frame_index = frame_index;
    if (j.contains("polygon"))
        out.polygons.push_back(parse_polygon(j["polygon"]));
    if (j.contains("polygons"))
    {
        if (!j["polygons"].is_array())
            throw Error(Errc::invalid_argument, "\"polygons\" must be an array");
        for (const auto &p : j["polygons"])
            out.polygons.push_back(parse_polygon(p));
    }
    if (out.polygons.empty())
        throw Error(Errc::invalid_argument, "outline needs \"polygon\" or \"polygons\"");
    return out;
}

ContourOutline load_outline(const fs::path &path, int frame_index)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::not_found, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return outline_from_json_text(ss.str(), frame_index);
}

std::string outline_to_json_text(const ContourOutline &outline)
{
    auto poly_json = [](const std::vector<Point> &poly) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto &p : poly)
            a.push_back({p.x, p.y});
        return a;
    };
    nlohmann::json j;
    if (outline.polygons.size() == 1)
        j["polygon"] = poly_json(outline.polygons.front());
    else
    {
        j["polygons"] = nlohmann::json::array();
        for (const auto &p : outline.polygons)
            j["polygons"].push_back(poly_json(p));
    }
    return j.dump();
}

namespace
{

double polygon_area(const std::vector<Point> &poly)
{
    double a = 0;
    for (std::size_t i = 0; i < poly.size(); ++i)
    {
        const Point &p = poly[i];
        const Point &q = poly[(i + 1) % poly.size()];
        a += p.x * q.y - q.x * p.y;
    }
    return std::abs(a) / 2;
}

double orient(Point a, Point b, Point c) { return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x); }

bool on_segment(Point a, Point b, Point p)
{
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Point a, Point b, Point c, Point d)
{
    const double d1 = orient(c, d, a), d2 = orient(c, d, b), d3 = orient(a, b, c), d4 = orient(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    return (d1 == 0 && on_segment(c, d, a)) || (d2 == 0 && on_segment(c, d, b)) || (d3 == 0 && on_segment(a, b, c)) ||
           (d4 == 0 && on_segment(a, b, d));
}

void validate_polygon(const std::vector<Point> &poly, int width, int height)
{
    if (poly.size() < 3)
        throw Error(Errc::invalid_argument, "degenerate polygon: fewer than 3 vertices");
    for (const auto &p : poly)
    {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw Error(Errc::invalid_argument, "degenerate polygon: non-finite vertex");
        if (p.x < 0 || p.y < 0 || p.x > width - 1 || p.y > height - 1)
            throw Error(Errc::invalid_argument, "outline vertex outside the frame");
    }
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = i + 1; k < n; ++k)
        {
            if (k == i + 1 || (i == 0 && k == n - 1))
                continue;
            if (segments_intersect(poly[i], poly[(i + 1) % n], poly[k], poly[(k + 1) % n]))
                throw Error(Errc::invalid_argument, "degenerate polygon: self-intersecting outline");
        }
    if (polygon_area(poly) < 9.0)
        throw Error(Errc::invalid_argument, "polygon area < 9 px");
}

// Scanline fill at pixel centres: x is inside when it lies strictly between
// an entering and a leaving crossing.
void fill_interior(const std::vector<Point> &poly, int width, int height, std::vector<std::uint8_t> &inside)
{
    const std::size_t n = poly.size();
    std::vector<double> xs;
    for (int y = 0; y < height; ++y)
    {
        xs.clear();
        for (std::size_t i = 0; i < n; ++i)
        {
            const Point a = poly[i];
            const Point b = poly[(i + 1) % n];
            if ((a.y <= y && b.y > y) || (b.y <= y && a.y > y))
                xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
        }
        std::sort(xs.begin(), xs.end());
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2)
        {
            const int x0 = std::max(0, static_cast<int>(std::floor(xs[k])) + 1);
            const int x1 = std::min(width - 1, static_cast<int>(std::ceil(xs[k + 1])) - 1);
            for (int x = x0; x <= x1; ++x)
                inside[static_cast<std::size_t>(y) * width + x] = 1;
        }
    }
    // Drop pixels whose centre sits on the outline.
    for (std::size_t i = 0; i < n; ++i)
    {
        const Point a = poly[i];
        const Point b = poly[(i + 1) % n];
        const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x))));
        const int x1 = std::min(width - 1, static_cast<int>(std::ceil(std::max(a.x, b.x))));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y))));
        const int y1 = std::min(height - 1, static_cast<int>(std::ceil(std::max(a.y, b.y))));
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
            {
                const Point p{static_cast<double>(x), static_cast<double>(y)};
                if (orient(a, b, p) == 0 && on_segment(a, b, p))
                    inside[static_cast<std::size_t>(y) * width + x] = 0;
            }
    }
}

} // namespace

bool point_strictly_inside(const std::vector<Point> &polygon, Point p)
{
    const std::size_t n = polygon.size();
    if (n < 3)
        return false;
    bool in = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++)
    {
        const Point a = polygon[i], b = polygon[j];
        if (orient(a, b, p) == 0 && on_segment(a, b, p))
            return false;
        if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x)
            in = !in;
    }
    return in;
}

// ---------------------------------------------------------------- CBEM

CannyThresholds auto_canny_thresholds(double v, double sigma)
{
    // Truncate toward zero after clamping, as int() does.
    const double lo = std::max(0.0, (1.0 - sigma) * v);
    const double hi = std::min(255.0, (1.0 + sigma) * v);
    // 0.67 * 100 is 66.99999... in binary; nudge by an ulp-scale epsilon so
    // exact decimal products truncate to the intended integer.
    return {static_cast<int>(lo + 1e-9), static_cast<int>(hi + 1e-9)};
}

std::size_t Cbem::edge_count() const noexcept
{
    return static_cast<std::size_t>(std::count(edges.begin(), edges.end(), std::uint8_t{255}));
}

GrayImage Cbem::image() const { return {width, height, edges}; }

Cbem Cbem::from_image(const GrayImage &img)
{
    Cbem c;
    c.width = img.width;
    c.height = img.height;
    c.edges.resize(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i)
        c.edges[i] = img.data[i] >= 128 ? 255 : 0;
    return c;
}

GrayImage to_gray(const Frame &frame)
{
    GrayImage g{frame.width(), frame.height(),
                std::vector<std::uint8_t>(static_cast<std::size_t>(frame.width()) * frame.height())};
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(g.data.size());
    const std::uint8_t *src = frame.bytes().data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        g.data[i] = static_cast<std::uint8_t>((299 * src[3 * i] + 587 * src[3 * i + 1] + 114 * src[3 * i + 2] + 500) / 1000);
    return g;
}

namespace
{

std::vector<float> gaussian_blur5(const GrayImage &g, double sigma)
{
    std::array<double, 5> k{};
    double sum = 0;
    for (int i = -2; i <= 2; ++i)
    {
        k[i + 2] = std::exp(-(i * i) / (2 * sigma * sigma));
        sum += k[i + 2];
    }
    for (double &v : k)
        v /= sum;
    const int w = g.width, h = g.height;
    std::vector<float> tmp(g.data.size()), out(g.data.size());
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
        {
            double s = 0;
            for (int i = -2; i <= 2; ++i)
            {
                const int xx = std::clamp(x + i, 0, w - 1);
                s += k[i + 2] * g.data[static_cast<std::size_t>(y) * w + xx];
            }
            tmp[static_cast<std::size_t>(y) * w + x] = static_cast<float>(s);
        }
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
        {
            double s = 0;
            for (int i = -2; i <= 2; ++i)
            {
                const int yy = std::clamp(y + i, 0, h - 1);
                s += k[i + 2] * tmp[static_cast<std::size_t>(yy) * w + x];
            }
            out[static_cast<std::size_t>(y) * w + x] = static_cast<float>(s);
        }
    return out;
}

double median_of(std::vector<std::uint8_t> values)
{
    if (values.empty())
        return 0.0;
    const std::size_t n = values.size();
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n / 2), values.end());
    const double hi = values[n / 2];
    if (n % 2)
        return hi;
    const double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n / 2));
    return 0.5 * (lo + hi);
}

} // namespace

Cbem build_cbem(const Frame &frame, const ContourOutline &outline, const CbemOptions &opts)
{
    const int w = frame.width(), h = frame.height();
    if (outline.polygons.empty())
        throw Error(Errc::invalid_argument, "degenerate polygon: outline is empty");
    std::vector<std::uint8_t> inside(static_cast<std::size_t>(w) * h, 0);
    for (const auto &poly : outline.polygons)
    {
        validate_polygon(poly, w, h);
        fill_interior(poly, w, h, inside);
    }

    const GrayImage gray = to_gray(frame);
    std::vector<std::uint8_t> region;
    for (std::size_t i = 0; i < inside.size(); ++i)
        if (inside[i])
            region.push_back(gray.data[i]);
    if (region.empty())
        throw Error(Errc::invalid_argument, "degenerate polygon: no pixel centres inside the outline");

    Cbem cbem;
    cbem.width = w;
    cbem.height = h;
    cbem.edges.assign(inside.size(), 0);
    cbem.median = median_of(region);
    cbem.thresholds = auto_canny_thresholds(cbem.median, opts.sigma_coeff);

    const std::vector<float> blurred = gaussian_blur5(gray, opts.blur_sigma);
    auto px = [&](int x, int y) {
        return blurred[static_cast<std::size_t>(std::clamp(y, 0, h - 1)) * w + std::clamp(x, 0, w - 1)];
    };

    // Sobel magnitude and 4-sector direction.
    std::vector<float> mag(inside.size(), 0.f);
    std::vector<std::uint8_t> sector(inside.size(), 0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
        {
            const double gx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1)) -
                              (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
            const double gy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1)) -
                              (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            mag[i] = static_cast<float>(std::hypot(gx, gy));
            double deg = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
            if (deg < 0)
                deg += 180.0;
            sector[i] = deg < 22.5 || deg >= 157.5 ? 0 : deg < 67.5 ? 1 : deg < 112.5 ? 2 : 3;
        }

    // Non-maximum suppression along the gradient, then classify.
    // 0: none, 1: weak, 2: strong
    static constexpr int dx[4] = {1, 1, 0, -1};
    static constexpr int dy[4] = {0, 1, 1, 1};
    const double lower = cbem.thresholds.lower, upper = cbem.thresholds.upper;
    std::vector<std::uint8_t> cls(inside.size(), 0);
#pragma omp parallel for schedule(static)
    for (int y = 1; y < h - 1; ++y)
        for (int x = 1; x < w - 1; ++x)
        {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (!inside[i])
                continue;
            const float m = mag[i];
            if (m <= lower)
                continue;
            const int s = sector[i];
            const float behind = mag[static_cast<std::size_t>(y - dy[s]) * w + (x - dx[s])];
            const float ahead = mag[static_cast<std::size_t>(y + dy[s]) * w + (x + dx[s])];
            if (m > behind && m >= ahead)
                cls[i] = m > upper ? 2 : 1;
        }

    // Hysteresis: keep weak pixels 8-connected to a strong one.
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < cls.size(); ++i)
        if (cls[i] == 2)
        {
            cbem.edges[i] = 255;
            queue.push_back(i);
        }
    while (!queue.empty())
    {
        const std::size_t i = queue.front();
        queue.pop_front();
        const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
        for (int oy = -1; oy <= 1; ++oy)
            for (int ox = -1; ox <= 1; ++ox)
            {
                const int nx = x + ox, ny = y + oy;
                if (nx < 0 || ny < 0 || nx >= w || ny >= h)
                    continue;
                const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
                if (cls[ni] == 1 && cbem.edges[ni] == 0)
                {
                    cbem.edges[ni] = 255;
                    queue.push_back(ni);
                }
            }
    }
    return cbem;
}

// ---------------------------------------------------------------- recall

std::optional<double> detection_rate(std::size_t tp, std::size_t fn)
{
    if (tp + fn == 0)
        return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

FrameEval evaluate(const Cbem &cbem, const AnnotationRecord &record, int tau)
{
    if (tau < 0)
        throw Error(Errc::invalid_argument, "tolerance tau must be non-negative");
    const int w = cbem.width, h = cbem.height;
    // Summed-area table over annotated pixels for O(1) window queries.
    std::vector<std::uint32_t> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0);
    std::vector<std::uint8_t> marked(static_cast<std::size_t>(w) * h, 0);
    for (const auto &p : record.pixels)
    {
        if (p.x < 0 || p.y < 0 || p.x >= w || p.y >= h)
            throw Error(Errc::dimension_mismatch, "annotated pixel outside the CBEM");
        marked[static_cast<std::size_t>(p.y) * w + p.x] = 1;
    }
    for (int y = 0; y < h; ++y)
    {
        std::uint32_t row = 0;
        for (int x = 0; x < w; ++x)
        {
            row += marked[static_cast<std::size_t>(y) * w + x];
            sat[static_cast<std::size_t>(y + 1) * (w + 1) + x + 1] = sat[static_cast<std::size_t>(y) * (w + 1) + x + 1] + row;
        }
    }
    auto window = [&](int x0, int y0, int x1, int y1) {
        x0 = std::max(x0, 0);
        y0 = std::max(y0, 0);
        x1 = std::min(x1, w - 1);
        y1 = std::min(y1, h - 1);
        const auto at = [&](int x, int y) { return sat[static_cast<std::size_t>(y) * (w + 1) + x]; };
        return at(x1 + 1, y1 + 1) - at(x0, y1 + 1) - at(x1 + 1, y0) + at(x0, y0);
    };

    FrameEval e;
    e.frame_index = record.frame_index;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
        {
            if (!cbem.edge(x, y))
                continue;
            if (window(x - tau, y - tau, x + tau, y + tau) > 0)
                ++e.tp;
            else
                ++e.fn;
        }
    e.recall = detection_rate(e.tp, e.fn);
    if (!e.recall && record.pixels.empty())
        e.recall = 1.0;
    return e;
}

EvalReport aggregate(std::vector<FrameEval> frames, int tau)
{
    EvalReport r;
    r.tau = tau;
    r.frames = std::move(frames);
    for (const auto &f : r.frames)
    {
        r.total_tp += f.tp;
        r.total_fn += f.fn;
    }
    r.aggregate_recall = detection_rate(r.total_tp, r.total_fn);
    return r;
}

std::string eval_report_to_json(const EvalReport &report)
{
    auto opt = [](const std::optional<double> &v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
    nlohmann::ordered_json j;
    j["tau"] = report.tau;
    j["frames"] = nlohmann::ordered_json::array();
    for (const auto &f : report.frames)
        j["frames"].push_back({{"frame_index", f.frame_index}, {"tp", f.tp}, {"fn", f.fn}, {"recall", opt(f.recall)}});
    j["total_tp"] = report.total_tp;
    j["total_fn"] = report.total_fn;
    j["aggregate_recall"] = opt(report.aggregate_recall);
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- ablation

bool detected_at(int peak_value, int threshold) { return threshold == 0 ? peak_value > 0 : peak_value >= threshold; }

AblationReport run_ablation(const std::vector<LabeledFrame> &frames, const std::vector<int> &thresholds)
{
    if (thresholds.empty())
        throw Error(Errc::invalid_argument, "ablation needs at least one threshold");
    if (std::set<int>(thresholds.begin(), thresholds.end()).size() != thresholds.size())
        throw Error(Errc::invalid_argument, "ablation thresholds must be distinct");
    for (int t : thresholds)
        if (t < 0)
            throw Error(Errc::invalid_argument, "ablation thresholds must be non-negative");

    std::size_t negatives = 0, positives = 0;
    for (const auto &f : frames)
        (f.has_marking ? positives : negatives)++;

    AblationReport report;
    double best = 0;
    for (std::size_t k = 0; k < thresholds.size(); ++k)
    {
        const int t = thresholds[k];
        std::size_t fp = 0, tp = 0;
        for (const auto &f : frames)
        {
            if (!detected_at(f.peak_value, t))
                continue;
            (f.has_marking ? tp : fp)++;
        }
        AblationRow row{t, std::nullopt, std::nullopt};
        if (negatives)
            row.fp_percent = 100.0 * static_cast<double>(fp) / static_cast<double>(negatives);
        if (positives)
            row.tp_percent = 100.0 * static_cast<double>(tp) / static_cast<double>(positives);
        const double score = row.fp_percent.value_or(0.0) - row.tp_percent.value_or(0.0);
        if (k == 0 || score < best)
        {
            best = score;
            report.t_optimal = t;
        }
        report.rows.push_back(row);
    }
    return report;
}

void write_ablation_csv(const AblationReport &report, std::ostream &out)
{
    out << "threshold,fp_percent\n";
    for (const auto &r : report.rows)
    {
        out << r.threshold << ',';
        if (r.fp_percent)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.2f", *r.fp_percent);
            out << buf;
        }
        else
            out << "undefined";
        out << '\n';
    }
    out << "t_optimal," << report.t_optimal << '\n';
}

std::vector<std::pair<int, bool>> read_labels_csv(const fs::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::not_found, "cannot open " + path.string());
    std::vector<std::pair<int, bool>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || (lineno == 1 && line.rfind("frame_index", 0) == 0))
            continue;
        int index = 0, flag = 0;
        char comma = 0;
        std::istringstream ls(line);
        if (!(ls >> index >> comma >> flag) || comma != ',' || (flag != 0 && flag != 1))
            throw Error(Errc::invalid_argument,
                        path.string() + ":" + std::to_string(lineno) + ": expected frame_index,has_marking");
        out.emplace_back(index, flag == 1);
    }
    return out;
}

} // namespace alina
