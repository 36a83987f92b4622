#include "alina/image_io.hpp"

#include "alina/error.hpp"

#include <png.h>

#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>

namespace alina
{

namespace fs = std::filesystem;

namespace
{

std::vector<std::uint8_t> read_bytes(const fs::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::io_failed, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool is_png(const std::vector<std::uint8_t> &b)
{
    static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    return b.size() >= 8 && std::memcmp(b.data(), sig, 8) == 0;
}

struct PpmHeader
{
    int width = 0;
    int height = 0;
    std::size_t data_offset = 0;
};

PpmHeader parse_ppm_header(const std::vector<std::uint8_t> &b, const fs::path &path)
{
    if (b.size() < 2 || b[0] != 'P' || b[1] != '6')
        throw Error(Errc::decode_failed, "unsupported image format: " + path.string());
    std::size_t pos = 2;
    auto next_int = [&]() {
        for (;;)
        {
            while (pos < b.size() && std::isspace(b[pos]))
                ++pos;
            if (pos < b.size() && b[pos] == '#')
            {
                while (pos < b.size() && b[pos] != '\n')
                    ++pos;
                continue;
            }
            break;
        }
        if (pos >= b.size() || !std::isdigit(b[pos]))
            throw Error(Errc::decode_failed, "malformed PPM header: " + path.string());
        long v = 0;
        while (pos < b.size() && std::isdigit(b[pos]))
        {
            v = v * 10 + (b[pos++] - '0');
            if (v > 1'000'000)
                throw Error(Errc::decode_failed, "PPM dimension too large: " + path.string());
        }
        return static_cast<int>(v);
    };
    PpmHeader h;
    h.width = next_int();
    h.height = next_int();
    const int maxval = next_int();
    if (maxval != 255)
        throw Error(Errc::decode_failed, "only 8-bit PPM is supported: " + path.string());
    if (pos >= b.size() || !std::isspace(b[pos]))
        throw Error(Errc::decode_failed, "malformed PPM header: " + path.string());
    h.data_offset = pos + 1;
    return h;
}

struct PngImage
{
    png_image img;
    PngImage()
    {
        std::memset(&img, 0, sizeof img);
        img.version = PNG_IMAGE_VERSION;
    }
    ~PngImage() { png_image_free(&img); }
};

} // namespace

Dims read_dims(const fs::path &path)
{
    const auto bytes = read_bytes(path);
    if (is_png(bytes))
    {
        PngImage png;
        if (!png_image_begin_read_from_memory(&png.img, bytes.data(), bytes.size()))
            throw Error(Errc::decode_failed, std::string("PNG: ") + png.img.message);
        return {static_cast<int>(png.img.width), static_cast<int>(png.img.height)};
    }
    const auto h = parse_ppm_header(bytes, path);
    if (bytes.size() - h.data_offset < static_cast<std::size_t>(h.width) * h.height * 3)
        throw Error(Errc::decode_failed, "truncated PPM: " + path.string());
    return {h.width, h.height};
}

Frame read_frame(const fs::path &path)
{
    const auto bytes = read_bytes(path);
    if (is_png(bytes))
    {
        PngImage png;
        if (!png_image_begin_read_from_memory(&png.img, bytes.data(), bytes.size()))
            throw Error(Errc::decode_failed, std::string("PNG: ") + png.img.message);
        png.img.format = PNG_FORMAT_RGB;
        std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(png.img));
        if (!png_image_finish_read(&png.img, nullptr, rgb.data(), 0, nullptr))
            throw Error(Errc::decode_failed, std::string("PNG: ") + png.img.message);
        return Frame(static_cast<int>(png.img.width), static_cast<int>(png.img.height), std::move(rgb));
    }
    const auto h = parse_ppm_header(bytes, path);
    const std::size_t n = static_cast<std::size_t>(h.width) * h.height * 3;
    if (bytes.size() - h.data_offset < n)
        throw Error(Errc::decode_failed, "truncated PPM: " + path.string());
    std::vector<std::uint8_t> rgb(bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset),
                                  bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset + n));
    return Frame(h.width, h.height, std::move(rgb));
}

GrayImage read_gray(const fs::path &path)
{
    const Frame f = read_frame(path);
    GrayImage g{f.width(), f.height(), std::vector<std::uint8_t>(static_cast<std::size_t>(f.width()) * f.height())};
    for (std::size_t i = 0; i < g.data.size(); ++i)
        g.data[i] = f.bytes()[i * 3];
    return g;
}

static void ensure_parent(const fs::path &path)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
}

static void write_png_raw(const std::uint8_t *data, int w, int h, png_uint_32 format, const fs::path &path)
{
    ensure_parent(path);
    PngImage png;
    png.img.width = static_cast<png_uint_32>(w);
    png.img.height = static_cast<png_uint_32>(h);
    png.img.format = format;
    if (!png_image_write_to_file(&png.img, path.c_str(), 0, data, 0, nullptr))
        throw Error(Errc::io_failed, "cannot write " + path.string() + ": " + png.img.message);
}

void write_png(const Frame &frame, const fs::path &path)
{
    write_png_raw(frame.bytes().data(), frame.width(), frame.height(), PNG_FORMAT_RGB, path);
}

void write_png(const GrayImage &image, const fs::path &path)
{
    write_png_raw(image.data.data(), image.width, image.height, PNG_FORMAT_GRAY, path);
}

void write_ppm(const Frame &frame, const fs::path &path)
{
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(Errc::io_failed, "cannot write " + path.string());
    out << "P6\n" << frame.width() << ' ' << frame.height() << "\n255\n";
    out.write(reinterpret_cast<const char *>(frame.bytes().data()), static_cast<std::streamsize>(frame.bytes().size()));
}

std::vector<std::uint8_t> encode_png(const Frame &frame)
{
    PngImage png;
    png.img.width = static_cast<png_uint_32>(frame.width());
    png.img.height = static_cast<png_uint_32>(frame.height());
    png.img.format = PNG_FORMAT_RGB;
    png_alloc_size_t size = 0;
    if (!png_image_write_get_memory_size(png.img, size, 0, frame.bytes().data(), 0, nullptr))
        throw Error(Errc::io_failed, std::string("PNG encode: ") + png.img.message);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&png.img, out.data(), &size, 0, frame.bytes().data(), 0, nullptr))
        throw Error(Errc::io_failed, std::string("PNG encode: ") + png.img.message);
    out.resize(size);
    return out;
}

} // namespace alina
