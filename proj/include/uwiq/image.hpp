#pragma once

#include <string>
#include <vector>

namespace uwiq {

// Interleaved row-major RGB raster with unit-interval double channels.
// Quantization to 8-bit happens only at the file boundary (load/save).
struct ImageRGB {
    int width = 0;
    int height = 0;
    std::vector<double> data;  // height * width * 3, [r g b] per pixel

    ImageRGB() = default;
    ImageRGB(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {}

    double& at(int y, int x, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
    double at(int y, int x, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

// Per-pixel (L, a, b), same layout as ImageRGB. L in [0,100].
struct LabImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;
};

// Per-pixel (h, s, v) with h in [0,360), s and v in [0,1].
struct HsvImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;
};

// Throws std::invalid_argument if dimensions are non-positive, the buffer
// size disagrees with them, or any channel is non-finite or outside [0,1].
void require_valid(const ImageRGB& img);

// Reads an 8-bit RGB PNG or a binary PPM (P6, maxval 255). Byte v maps to
// v/255 exactly. Throws std::runtime_error on missing files, unsupported
// or corrupt content, and non-positive dimensions.
ImageRGB load_image(const std::string& path);

// Writes PNG or PPM depending on the file extension (.png / .ppm).
// Channel v is stored as round(v*255) clamped to [0,255].
void save_image(const ImageRGB& img, const std::string& path);

// sRGB (gamma-decoded) -> XYZ (D65) -> CIELab.
LabImage rgb_to_lab(const ImageRGB& img);

// Standard hexcone HSV; s = (max-min)/max, with s = 0 when max = 0.
HsvImage rgb_to_hsv(const ImageRGB& img);

// Rec.601 luma: 0.299 R + 0.587 G + 0.114 B, one value per pixel.
std::vector<double> luminance(const ImageRGB& img);

// Bilinear resampling; used to cap training image size.
ImageRGB resize_bilinear(const ImageRGB& img, int new_width, int new_height);

}  // namespace uwiq
