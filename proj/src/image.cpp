#include "uwiq/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>

#include "uwiq/kernels.hpp"

namespace uwiq {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

ImageRGB from_bytes(const std::vector<unsigned char>& bytes, int w, int h) {
    ImageRGB img(w, h);
    const std::size_t n = img.data.size();
    for (std::size_t i = 0; i < n; ++i) {
        img.data[i] = static_cast<double>(bytes[i]) / 255.0;
    }
    return img;
}

// ---- PPM (P6, maxval 255) --------------------------------------------

int ppm_token(std::istream& in) {
    // Skips whitespace and '#' comments, then reads one decimal integer.
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    if (c == EOF || !std::isdigit(c)) return -1;
    long v = 0;
    while (c != EOF && std::isdigit(c)) {
        v = v * 10 + (c - '0');
        if (v > 1000000) return -1;
        c = in.get();
    }
    if (c != EOF) in.unget();
    return static_cast<int>(v);
}

ImageRGB load_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open file: " + path);
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '6') fail("unsupported format (expected P6): " + path);
    const int w = ppm_token(in);
    const int h = ppm_token(in);
    const int maxval = ppm_token(in);
    if (w <= 0 || h <= 0) fail("corrupt PPM header (bad dimensions): " + path);
    if (maxval != 255) fail("unsupported PPM maxval (only 255): " + path);
    in.get();  // the single whitespace before raster data
    std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
        fail("corrupt PPM (truncated raster): " + path);
    }
    return from_bytes(bytes, w, h);
}

void save_ppm(const ImageRGB& img, const std::string& path,
              const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot write file: " + path);
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) fail("write failed: " + path);
}

// ---- PNG (8-bit RGB via libpng) ----------------------------------------

ImageRGB load_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) fail("cannot open file: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail("libpng init failed");
    }
    std::vector<unsigned char> bytes;
    std::vector<png_bytep> rows;
    int w = 0, h = 0;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail("corrupt PNG: " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);
    w = static_cast<int>(png_get_image_width(png, info));
    h = static_cast<int>(png_get_image_height(png, info));
    const int depth = png_get_bit_depth(png, info);
    const int ctype = png_get_color_type(png, info);
    if (depth != 8 || ctype != PNG_COLOR_TYPE_RGB) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail("unsupported PNG (need 8-bit RGB, no alpha): " + path);
    }
    if (w <= 0 || h <= 0) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail("corrupt PNG header: " + path);
    }
    bytes.resize(static_cast<std::size_t>(w) * h * 3);
    rows.resize(h);
    for (int y = 0; y < h; ++y) {
        rows[y] = bytes.data() + static_cast<std::size_t>(y) * w * 3;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return from_bytes(bytes, w, h);
}

void save_png(const ImageRGB& img, const std::string& path,
              std::vector<unsigned char>& bytes) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) fail("cannot write file: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail("libpng init failed");
    }
    std::vector<png_bytep> rows(img.height);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail("PNG write failed: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y) {
        rows[y] = bytes.data() + static_cast<std::size_t>(y) * img.width * 3;
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

bool has_suffix(const std::string& s, const std::string& suf) {
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

}  // namespace

void require_valid(const ImageRGB& img) {
    if (img.width <= 0 || img.height <= 0) {
        throw std::invalid_argument("image dimensions must be positive");
    }
    if (img.data.size() != img.pixel_count() * 3) {
        throw std::invalid_argument("image buffer size does not match dimensions");
    }
    for (double v : img.data) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw std::invalid_argument("image channels must be finite and in [0,1]");
        }
    }
}

ImageRGB load_image(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) fail("missing file: " + path);
    unsigned char magic[2] = {0, 0};
    probe.read(reinterpret_cast<char*>(magic), 2);
    probe.close();
    if (magic[0] == 0x89 && magic[1] == 'P') return load_png(path);
    if (magic[0] == 'P' && magic[1] == '6') return load_ppm(path);
    fail("unsupported format (not PNG or PPM/P6): " + path);
}

void save_image(const ImageRGB& img, const std::string& path) {
    require_valid(img);
    std::vector<unsigned char> bytes(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const double q = std::round(img.data[i] * 255.0);
        bytes[i] = static_cast<unsigned char>(std::clamp(q, 0.0, 255.0));
    }
    if (has_suffix(path, ".png")) {
        save_png(img, path, bytes);
    } else if (has_suffix(path, ".ppm")) {
        save_ppm(img, path, bytes);
    } else {
        fail("unsupported output extension (use .png or .ppm): " + path);
    }
}

LabImage rgb_to_lab(const ImageRGB& img) {
    require_valid(img);
    LabImage out{img.width, img.height, std::vector<double>(img.data.size())};
    kern::srgb_to_lab(img.data.data(), out.data.data(), img.pixel_count());
    return out;
}

HsvImage rgb_to_hsv(const ImageRGB& img) {
    require_valid(img);
    HsvImage out{img.width, img.height, std::vector<double>(img.data.size())};
    kern::srgb_to_hsv(img.data.data(), out.data.data(), img.pixel_count());
    return out;
}

std::vector<double> luminance(const ImageRGB& img) {
    require_valid(img);
    std::vector<double> y(img.pixel_count());
    kern::luminance_rec601(img.data.data(), y.data(), img.pixel_count());
    return y;
}

ImageRGB resize_bilinear(const ImageRGB& img, int new_width, int new_height) {
    require_valid(img);
    if (new_width <= 0 || new_height <= 0) {
        throw std::invalid_argument("resize dimensions must be positive");
    }
    if (new_width == img.width && new_height == img.height) return img;
    ImageRGB out(new_width, new_height);
    const double sx = static_cast<double>(img.width) / new_width;
    const double sy = static_cast<double>(img.height) / new_height;
    for (int y = 0; y < new_height; ++y) {
        const double fy = (y + 0.5) * sy - 0.5;
        const int y0 = std::clamp(static_cast<int>(std::floor(fy)), 0, img.height - 1);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double wy = std::clamp(fy - y0, 0.0, 1.0);
        for (int x = 0; x < new_width; ++x) {
            const double fx = (x + 0.5) * sx - 0.5;
            const int x0 = std::clamp(static_cast<int>(std::floor(fx)), 0, img.width - 1);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double wx = std::clamp(fx - x0, 0.0, 1.0);
            for (int c = 0; c < 3; ++c) {
                const double top = img.at(y0, x0, c) * (1.0 - wx) + img.at(y0, x1, c) * wx;
                const double bot = img.at(y1, x0, c) * (1.0 - wx) + img.at(y1, x1, c) * wx;
                out.at(y, x, c) = std::clamp(top * (1.0 - wy) + bot * wy, 0.0, 1.0);
            }
        }
    }
    return out;
}

}  // namespace uwiq
