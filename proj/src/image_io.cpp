#include "sob/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

#include <png.h>

#include "sob/common.hpp"

namespace sob {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw io_error("cannot open '" + path + "'");
    return f;
}

std::string lower_ext(const std::string& path) {
    const size_t dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext;
}

// Reads the next whitespace/comment-delimited PNM header token.
std::string pnm_token(std::FILE* f, const std::string& path) {
    std::string tok;
    int c;
    while ((c = std::fgetc(f)) != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = std::fgetc(f);
            if (!tok.empty()) break;
        } else if (std::isspace(c)) {
            if (!tok.empty()) break;
        } else {
            tok.push_back(static_cast<char>(c));
        }
    }
    if (tok.empty()) throw format_error("truncated header in '" + path + "'");
    return tok;
}

int pnm_int(std::FILE* f, const std::string& path) {
    const std::string tok = pnm_token(f, path);
    try {
        return std::stoi(tok);
    } catch (const std::exception&) {
        throw format_error("bad header field '" + tok + "' in '" + path + "'");
    }
}

uint8_t quantize(float v) {
    return static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

} // namespace

Image read_pnm(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    char magic[3] = {0, 0, 0};
    if (std::fread(magic, 1, 2, f.get()) != 2)
        throw format_error("truncated header in '" + path + "'");
    int channels;
    if (magic[0] == 'P' && magic[1] == '5') channels = 1;
    else if (magic[0] == 'P' && magic[1] == '6') channels = 3;
    else throw format_error("'" + path + "' is not a P5/P6 PNM file");

    const int w = pnm_int(f.get(), path);
    const int h = pnm_int(f.get(), path);
    const int maxval = pnm_int(f.get(), path);
    if (w < 1 || h < 1) throw format_error("bad dimensions in '" + path + "'");
    if (maxval < 1 || maxval > 255)
        throw format_error("unsupported maxval " + std::to_string(maxval) + " in '" + path + "'");

    const size_t n = static_cast<size_t>(w) * h * channels;
    std::vector<uint8_t> raw(n);
    if (std::fread(raw.data(), 1, n, f.get()) != n)
        throw format_error("truncated pixel data in '" + path + "'");

    Image img(w, h, channels);
    for (size_t i = 0; i < n; ++i) img.data()[i] = static_cast<float>(raw[i]);
    return img;
}

void write_pgm(const std::string& path, const Image& img) {
    const Image gray = to_grayscale(img);
    FilePtr f = open_file(path, "wb");
    std::fprintf(f.get(), "P5\n%d %d\n255\n", gray.width(), gray.height());
    const std::vector<uint8_t> bytes = quantize_channel(gray, 0);
    if (std::fwrite(bytes.data(), 1, bytes.size(), f.get()) != bytes.size())
        throw io_error("short write to '" + path + "'");
}

void write_ppm(const std::string& path, const Image& img) {
    FilePtr f = open_file(path, "wb");
    std::fprintf(f.get(), "P6\n%d %d\n255\n", img.width(), img.height());
    std::vector<uint8_t> bytes;
    bytes.reserve(static_cast<size_t>(img.width()) * img.height() * 3);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < 3; ++c)
                bytes.push_back(quantize(img.channels() == 3 ? img.at(x, y, c) : img.at(x, y)));
    if (std::fwrite(bytes.data(), 1, bytes.size(), f.get()) != bytes.size())
        throw io_error("short write to '" + path + "'");
}

Image read_png(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    uint8_t sig[8];
    if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8))
        throw format_error("'" + path + "' is not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw io_error("libpng initialization failed");
    }
    std::vector<uint8_t> pixels;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw format_error("corrupt PNG file '" + path + "'");
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    // Normalize everything to 8-bit gray or RGB.
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_packing(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY &&
        png_get_bit_depth(png, info) < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    png_read_update_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    const int ch = static_cast<int>(png_get_channels(png, info));
    if (ch != 1 && ch != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw format_error("unsupported PNG channel count in '" + path + "'");
    }
    const size_t stride = png_get_rowbytes(png, info);
    pixels.resize(stride * h);
    rows.resize(static_cast<size_t>(h));
    for (int y = 0; y < h; ++y) rows[static_cast<size_t>(y)] = pixels.data() + stride * y;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(w, h, ch);
    for (int y = 0; y < h; ++y) {
        const uint8_t* row = pixels.data() + stride * y;
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < ch; ++c)
                img.at(x, y, c) = static_cast<float>(row[x * ch + c]);
    }
    return img;
}

void write_png(const std::string& path, const Image& img) {
    FilePtr f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw io_error("libpng initialization failed");
    }
    const int ch = img.channels();
    std::vector<uint8_t> bytes(static_cast<size_t>(img.width()) * img.height() * ch);
    size_t i = 0;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < ch; ++c) bytes[i++] = quantize(img.at(x, y, c));
    std::vector<png_bytep> rows(static_cast<size_t>(img.height()));
    for (int y = 0; y < img.height(); ++y)
        rows[static_cast<size_t>(y)] = bytes.data() + static_cast<size_t>(y) * img.width() * ch;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw io_error("PNG write failed for '" + path + "'");
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
                 static_cast<png_uint_32>(img.height()), 8,
                 ch == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

FloatMap read_pfm(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    char magic[3] = {0, 0, 0};
    if (std::fread(magic, 1, 2, f.get()) != 2)
        throw format_error("truncated header in '" + path + "'");
    if (magic[0] != 'P' || magic[1] != 'f')
        throw format_error("'" + path + "' is not a grayscale PFM file");
    const int w = pnm_int(f.get(), path);
    const int h = pnm_int(f.get(), path);
    const std::string scale_tok = pnm_token(f.get(), path);
    const double scale = std::strtod(scale_tok.c_str(), nullptr);
    if (scale >= 0.0) throw format_error("big-endian PFM not supported: '" + path + "'");
    if (w < 1 || h < 1) throw format_error("bad dimensions in '" + path + "'");

    FloatMap map;
    map.width = w;
    map.height = h;
    map.values.resize(static_cast<size_t>(w) * h);
    std::vector<float> row(static_cast<size_t>(w));
    for (int y = h - 1; y >= 0; --y) { // bottom-up storage
        if (std::fread(row.data(), sizeof(float), row.size(), f.get()) != row.size())
            throw format_error("truncated pixel data in '" + path + "'");
        std::memcpy(&map.values[static_cast<size_t>(y) * w], row.data(),
                    row.size() * sizeof(float));
    }
    return map;
}

void write_pfm(const std::string& path, const FloatMap& map) {
    FilePtr f = open_file(path, "wb");
    std::fprintf(f.get(), "Pf\n%d %d\n-1.0\n", map.width, map.height);
    for (int y = map.height - 1; y >= 0; --y) {
        const float* row = &map.values[static_cast<size_t>(y) * map.width];
        if (std::fwrite(row, sizeof(float), static_cast<size_t>(map.width), f.get()) !=
            static_cast<size_t>(map.width))
            throw io_error("short write to '" + path + "'");
    }
}

Image read_image(const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == "pgm" || ext == "ppm" || ext == "pnm") return read_pnm(path);
    if (ext == "png") return read_png(path);
    throw format_error("unsupported image extension on '" + path + "'");
}

void write_image(const std::string& path, const Image& img) {
    const std::string ext = lower_ext(path);
    if (ext == "pgm") write_pgm(path, img);
    else if (ext == "ppm") write_ppm(path, img);
    else if (ext == "png") write_png(path, img);
    else throw format_error("unsupported image extension on '" + path + "'");
}

} // namespace sob
