#pragma once

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <csetjmp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <jpeglib.h>

#include "gibbsim/core/error.hpp"
#include "gibbsim/core/image.hpp"

namespace gibbsim {

namespace detail {

inline RgbImage rgb_from_interleaved(const std::uint8_t* px, std::size_t h, std::size_t w, std::size_t channels,
                                     double maxval)
{
    RgbImage img{RealImage(h, w), RealImage(h, w), RealImage(h, w)};
    for (std::size_t i = 0; i < h * w; ++i) {
        const std::uint8_t* p = px + i * channels;
        img.r.storage()[i] = p[0] / maxval;
        img.g.storage()[i] = p[channels > 1 ? 1 : 0] / maxval;
        img.b.storage()[i] = p[channels > 1 ? 2 : 0] / maxval;
    }
    return img;
}

inline RgbImage decode_png(const std::filesystem::path& path)
{
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        throw FormatError(path.string() + ": " + image.message);
    image.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
        png_image_free(&image);
        throw FormatError(path.string() + ": " + image.message);
    }
    return rgb_from_interleaved(buf.data(), image.height, image.width, 3, 255.0);
}

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit(j_common_ptr cinfo)
{
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

inline void jpeg_quiet(j_common_ptr) {}

inline RgbImage decode_jpeg(const std::filesystem::path& path)
{
    std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "rb"), &std::fclose);
    if (!file)
        throw Error("cannot open " + path.string());
    jpeg_decompress_struct cinfo{};
    JpegErrorManager err{};
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    err.base.output_message = jpeg_quiet;
    std::vector<std::uint8_t>* pixels = new std::vector<std::uint8_t>();
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        delete pixels;
        throw FormatError(path.string() + ": " + err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, file.get());
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    const std::size_t h = cinfo.output_height, w = cinfo.output_width;
    const std::size_t channels = static_cast<std::size_t>(cinfo.output_components);
    pixels->resize(h * w * channels);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = pixels->data() + static_cast<std::size_t>(cinfo.output_scanline) * w * channels;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    RgbImage img = rgb_from_interleaved(pixels->data(), h, w, channels, 255.0);
    delete pixels;
    return img;
}

/// Binary and ASCII PGM/PPM (P2, P3, P5, P6), 8 or 16 bits.
inline RgbImage decode_pnm(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    auto token = [&]() {
        std::string t;
        char c;
        while (in.get(c)) {
            if (c == '#') {
                std::string skip;
                std::getline(in, skip);
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c))) {
                if (!t.empty())
                    break;
                continue;
            }
            t.push_back(c);
        }
        if (t.empty())
            throw FormatError(path.string() + ": truncated PNM header");
        return t;
    };
    const std::string magic = token();
    if (magic != "P2" && magic != "P3" && magic != "P5" && magic != "P6")
        throw FormatError(path.string() + ": unsupported PNM magic " + magic);
    std::size_t w = 0, h = 0;
    long maxval = 0;
    try {
        w = std::stoul(token());
        h = std::stoul(token());
        maxval = std::stol(token());
    } catch (const std::logic_error&) {
        throw FormatError(path.string() + ": malformed PNM header");
    }
    if (w == 0 || h == 0 || maxval < 1 || maxval > 65535)
        throw FormatError(path.string() + ": invalid PNM dimensions or maxval");
    const std::size_t channels = (magic == "P3" || magic == "P6") ? 3 : 1;
    const std::size_t n = w * h * channels;
    std::vector<double> vals(n);
    if (magic == "P2" || magic == "P3") {
        for (auto& v : vals)
            v = std::stod(token());
    } else {
        const std::size_t bytes = maxval > 255 ? 2 : 1;
        std::vector<unsigned char> raw(n * bytes);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (static_cast<std::size_t>(in.gcount()) != raw.size())
            throw FormatError(path.string() + ": truncated PNM raster");
        for (std::size_t i = 0; i < n; ++i)
            vals[i] = bytes == 2 ? (raw[2 * i] << 8 | raw[2 * i + 1]) : raw[i];
    }
    RgbImage img{RealImage(h, w), RealImage(h, w), RealImage(h, w)};
    const double scale = 1.0 / static_cast<double>(maxval);
    for (std::size_t i = 0; i < h * w; ++i) {
        const double* p = vals.data() + i * channels;
        img.r.storage()[i] = p[0] * scale;
        img.g.storage()[i] = p[channels > 1 ? 1 : 0] * scale;
        img.b.storage()[i] = p[channels > 1 ? 2 : 0] * scale;
    }
    return img;
}

inline std::string lower_extension(const std::filesystem::path& path)
{
    std::string ext = path.extension().string();
    for (auto& c : ext)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

} // namespace detail

inline bool is_supported_image(const std::filesystem::path& path)
{
    const std::string ext = detail::lower_extension(path);
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".pgm" || ext == ".ppm" || ext == ".pnm";
}

/// Decodes PNG, JPEG or PNM by extension into RGB channels scaled to [0, 1].
inline RgbImage decode_image(const std::filesystem::path& path)
{
    const std::string ext = detail::lower_extension(path);
    if (ext == ".png")
        return detail::decode_png(path);
    if (ext == ".jpg" || ext == ".jpeg")
        return detail::decode_jpeg(path);
    if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm")
        return detail::decode_pnm(path);
    throw FormatError(path.string() + ": unsupported image extension");
}

/// 8-bit grayscale PNG; values are mapped linearly from [lo, hi] and clipped.
inline void write_png_gray(const std::filesystem::path& path, const RealImage& img, double lo, double hi)
{
    if (!(hi > lo))
        throw ArgumentError("write_png_gray: need hi > lo");
    std::vector<std::uint8_t> buf(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double t = (img.storage()[i] - lo) / (hi - lo);
        buf[i] = static_cast<std::uint8_t>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0));
    }
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.c_str(), 0, buf.data(), 0, nullptr))
        throw Error(path.string() + ": " + image.message);
}

/// RGB PNG from three equally sized channels in [0, 1].
inline void write_png_rgb(const std::filesystem::path& path, const RgbImage& img)
{
    require_same_shape(img.r, img.g, "write_png_rgb");
    require_same_shape(img.r, img.b, "write_png_rgb");
    std::vector<std::uint8_t> buf(3 * img.r.size());
    for (std::size_t i = 0; i < img.r.size(); ++i) {
        buf[3 * i] = static_cast<std::uint8_t>(std::lround(std::clamp(img.r.storage()[i], 0.0, 1.0) * 255.0));
        buf[3 * i + 1] = static_cast<std::uint8_t>(std::lround(std::clamp(img.g.storage()[i], 0.0, 1.0) * 255.0));
        buf[3 * i + 2] = static_cast<std::uint8_t>(std::lround(std::clamp(img.b.storage()[i], 0.0, 1.0) * 255.0));
    }
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.r.width());
    image.height = static_cast<png_uint_32>(img.r.height());
    image.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&image, path.c_str(), 0, buf.data(), 0, nullptr))
        throw Error(path.string() + ": " + image.message);
}

} // namespace gibbsim
