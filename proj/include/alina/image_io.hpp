#pragma once

#include "alina/frame.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace alina
{

// 8-bit single-channel image, row-major.
struct GrayImage
{
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;
};

// Decodes PNG (any bit depth / colour type, reduced to 8-bit RGB) or binary
// PPM (P6, maxval 255). Throws Errc::decode_failed or Errc::io_failed.
Frame read_frame(const std::filesystem::path &path);

// Only reads the header; used to validate sequences cheaply.
Dims read_dims(const std::filesystem::path &path);

void write_png(const Frame &frame, const std::filesystem::path &path);
void write_png(const GrayImage &image, const std::filesystem::path &path);
void write_ppm(const Frame &frame, const std::filesystem::path &path);

std::vector<std::uint8_t> encode_png(const Frame &frame);

// Reads a PNG/PPM and keeps the first channel (red for colour images).
GrayImage read_gray(const std::filesystem::path &path);

} // namespace alina
