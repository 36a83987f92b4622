#include "alina/traversal.hpp"

#include "alina/error.hpp"

#include <algorithm>
#include <chrono>

namespace alina
{

std::vector<PixelCoord> traversal_offsets(const TraversalParams &p)
{
    if (p.theta < 1)
        throw Error(Errc::invalid_argument, "traversal radius theta must be >= 1");
    std::vector<PixelCoord> offsets;
    for (int i = -p.theta; i <= p.theta; ++i)
        for (int j = -p.theta; j <= p.theta; ++j)
        {
            if (i == 0 && j == 0)
                continue;
            if (p.disk_mode && i * i + j * j > p.theta * p.theta)
                continue;
            offsets.push_back({i, j});
        }
    return offsets;
}

namespace
{

class Traverser
{
public:
    Traverser(const BinaryMask &mask, const TraversalParams &p)
        : mask_(mask), w_(mask.width()), h_(mask.height()), theta_(p.theta), offsets_(traversal_offsets(p)),
          visited_(static_cast<std::size_t>(w_) * h_, 0)
    {
        linear_.reserve(offsets_.size());
        for (const auto &o : offsets_)
            linear_.push_back(static_cast<std::ptrdiff_t>(o.y) * w_ + o.x);
    }

    void run(PixelCoord seed, PixelSet &out)
    {
        if (seed.x < 0 || seed.y < 0 || seed.x >= w_ || seed.y >= h_)
            throw Error(Errc::out_of_bounds, "seed (" + std::to_string(seed.x) + "," + std::to_string(seed.y) +
                                                 ") outside the mask");
        const std::size_t s = index(seed.x, seed.y);
        if (visited_[s])
            return;
        visited_[s] = 1;
        stack_.push_back(seed);
        ++out.visit_count;

        const std::uint8_t *data = mask_.bytes().data();
        while (!stack_.empty())
        {
            const PixelCoord c = stack_.back();
            stack_.pop_back();
            const std::size_t ci = index(c.x, c.y);
            if (data[ci] != 255)
                continue;
            out.pixels.push_back(c);
            const bool interior = c.x >= theta_ && c.y >= theta_ && c.x < w_ - theta_ && c.y < h_ - theta_;
            for (std::size_t k = 0; k < offsets_.size(); ++k)
            {
                const int nx = c.x + offsets_[k].x;
                const int ny = c.y + offsets_[k].y;
                if (!interior && (nx < 0 || ny < 0 || nx >= w_ || ny >= h_))
                    continue;
                const std::size_t ni = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(ci) + linear_[k]);
                if (visited_[ni])
                    continue;
                visited_[ni] = 1;
                stack_.push_back({nx, ny});
                ++out.visit_count;
            }
        }
    }

private:
    std::size_t index(int x, int y) const noexcept { return static_cast<std::size_t>(y) * w_ + x; }

    const BinaryMask &mask_;
    int w_, h_, theta_;
    std::vector<PixelCoord> offsets_;
    std::vector<std::ptrdiff_t> linear_;
    std::vector<std::uint8_t> visited_;
    std::vector<PixelCoord> stack_;
};

void check_params(const BinaryMask &mask, const TraversalParams &p)
{
    if (p.theta < 1 || p.theta > std::min(mask.width(), mask.height()))
        throw Error(Errc::invalid_argument, "theta must lie in [1, min(W,H)]");
}

} // namespace

PixelSet circledat(const BinaryMask &mask, PixelCoord seed, const TraversalParams &p)
{
    check_params(mask, p);
    PixelSet out;
    Traverser(mask, p).run(seed, out);
    return out;
}

PixelSet circledat_multi(const BinaryMask &mask, const SeedSet &seeds, const TraversalParams &p)
{
    PixelSet out;
    if (seeds.seeds.empty())
        return out;
    check_params(mask, p);
    Traverser t(mask, p);
    for (const auto &s : seeds.seeds)
        t.run(s, out);
    return out;
}

PixelSet sliding_window_collect(const BinaryMask &mask)
{
    PixelSet out;
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.white(x, y))
                out.pixels.push_back({x, y});
    out.visit_count = static_cast<std::uint64_t>(mask.width()) * mask.height();
    return out;
}

BenchmarkReport benchmark_traversal(const std::vector<BinaryMask> &masks, const TraversalParams &p,
                                    const BenchmarkOptions &opts)
{
    if (masks.empty())
        throw Error(Errc::invalid_argument, "benchmark needs at least one mask");
    if (opts.runs < 1)
        throw Error(Errc::invalid_argument, "benchmark needs at least one run");

    std::vector<SeedSet> seeds;
    seeds.reserve(masks.size());
    for (const auto &m : masks)
    {
        const auto d = decide_presence(vertical_histogram(m), opts.presence_threshold);
        seeds.push_back(d.present ? extract_seeds(m, d, opts.seed_group_gap) : SeedSet{});
    }

    using clock = std::chrono::steady_clock;
    std::vector<double> circ_ms, sw_ms;
    std::uint64_t circ_visits = 0, sw_visits = 0;
    std::size_t sink = 0;
    for (int r = 0; r < opts.runs; ++r)
    {
        std::uint64_t visits = 0;
        auto t0 = clock::now();
        for (std::size_t k = 0; k < masks.size(); ++k)
        {
            const auto s = circledat_multi(masks[k], seeds[k], p);
            visits += s.visit_count;
            sink += s.pixels.size();
        }
        auto t1 = clock::now();
        circ_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        circ_visits = visits;

        visits = 0;
        t0 = clock::now();
        for (const auto &m : masks)
        {
            const auto s = sliding_window_collect(m);
            visits += s.visit_count;
            sink += s.pixels.size();
        }
        t1 = clock::now();
        sw_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        sw_visits = visits;
    }
    [[maybe_unused]] static volatile std::size_t keep;
    keep = sink;

    auto med = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    BenchmarkReport report;
    report.runs = opts.runs;
    report.masks = static_cast<int>(masks.size());
    report.rows.push_back({"SW Search", "O(m x n)", med(sw_ms), sw_visits});
    report.rows.push_back({"CIRCLEDAT", "O(k)", med(circ_ms), circ_visits});
    return report;
}

void write_benchmark_csv(const BenchmarkReport &report, std::ostream &out)
{
    out << "algorithm,complexity,median_ms,visits\n";
    for (const auto &r : report.rows)
        out << r.algorithm << ',' << r.complexity << ',' << r.median_ms << ',' << r.visits << '\n';
}

} // namespace alina
