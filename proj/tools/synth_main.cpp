// Writes a synthetic frame sequence with outlines, ground truth, labels and
// the ROI it was rendered with.
#include "alina/frame.hpp"
#include "alina/synthetic.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char **argv)
{
    namespace fs = std::filesystem;
    using namespace alina;

    CLI::App app{"Synthetic line marking sequences", "alina-synth"};
    std::string out_dir;
    int markings = 30, noise = 0;
    std::uint64_t seed = 1;
    app.add_option("--out", out_dir, "output directory")->required();
    app.add_option("--markings", markings, "frames with markings (straight, curved, junction in turn)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--noise", noise, "marking-free frames appended after the marking frames")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--seed", seed, "base seed");
    CLI11_PARSE(app, argc, argv);

    const Roi roi = synth::default_roi();
    const synth::MarkingShape shapes[] = {synth::MarkingShape::straight, synth::MarkingShape::curved,
                                          synth::MarkingShape::junction};
    std::vector<synth::Scene> scenes;
    for (int i = 0; i < markings; ++i)
        scenes.push_back(synth::render_scene(synth::marking_scene(shapes[i % 3], seed + i, roi), seed + i));
    // Noise frames cycle through no blob, short blobs and tall blobs.
    const int blob_heights[] = {0, 40, 110};
    for (int i = 0; i < noise; ++i)
    {
        const std::uint64_t s = seed + 100000 + i;
        scenes.push_back(synth::render_scene(synth::noise_scene(blob_heights[i % 3], s, roi), s));
    }
    synth::write_sequence(scenes, out_dir);
    save_roi(roi, fs::path(out_dir) / "roi.json");

    std::ofstream labels(fs::path(out_dir) / "labels.csv");
    labels << "frame_index,has_marking\n";
    for (int i = 0; i < markings + noise; ++i)
        labels << i << ',' << (i < markings ? 1 : 0) << '\n';

    std::cout << "wrote " << scenes.size() << " frames to " << out_dir << "\n";
    return 0;
}
