#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "uwiq/image.hpp"
#include "uwiq/rng.hpp"

namespace testsup {

// Self-deleting unique directory under the system temp root.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        const auto base = std::filesystem::temp_directory_path();
        path_ = base / ("uwiq_" + tag + "_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        if (path_.empty()) return;
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    TempDir(TempDir&& other) noexcept : path_(std::move(other.path_)) {
        other.path_.clear();
    }

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline uwiq::ImageRGB random_image(uwiq::Rng& rng, int w, int h) {
    uwiq::ImageRGB img(w, h);
    for (double& v : img.data) v = rng.uniform();
    return img;
}

inline uwiq::ImageRGB constant_image(int w, int h, double r, double g, double b) {
    uwiq::ImageRGB img(w, h);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        img.data[3 * i] = r;
        img.data[3 * i + 1] = g;
        img.data[3 * i + 2] = b;
    }
    return img;
}

// ---- procedurally generated toy corpus ---------------------------------
//
// One source = a clean gradient-plus-texture image (hq), a degraded variant
// with a spatially varying reddish cast, crushed contrast and slight
// darkening (lq), and an intermediate blend standing in for the raw image.

struct ToyParams {
    int width = 64;
    int height = 64;
    double texture_amp = 0.12;
    double crush_keep = 0.55;   // fraction of contrast kept in lq
    double crush_mid = 0.45;    // lq values contract toward this level
    double cast_base = 0.10;    // mean red-ward cast
    double cast_amp = 0.22;     // spatial variation of the cast
};

struct ToySource {
    std::string id;
    uwiq::ImageRGB raw;
    uwiq::ImageRGB hq;
    uwiq::ImageRGB lq;
};

inline ToySource make_toy_source(std::uint64_t seed, const ToyParams& p = {}) {
    uwiq::Rng rng(seed);
    const int w = p.width, h = p.height;

    double c0[3], c1[3];
    for (int c = 0; c < 3; ++c) {
        c0[c] = rng.uniform(0.15, 0.85);
        c1[c] = rng.uniform(0.15, 0.85);
    }
    const double theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    const double gx = std::cos(theta), gy = std::sin(theta);
    const double tex_period = rng.uniform(6.0, 14.0);
    const double tex_theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    const double tx = std::cos(tex_theta) / tex_period, ty = std::sin(tex_theta) / tex_period;
    const double tex_phase = rng.uniform(0.0, 6.28);

    const double cast_period = rng.uniform(5.0, 11.0);
    const double cast_theta = rng.uniform(0.0, 6.28);
    const double cx = std::cos(cast_theta) / cast_period, cy = std::sin(cast_theta) / cast_period;
    const double cast_phase = rng.uniform(0.0, 6.28);

    uwiq::ImageRGB hq(w, h), lq(w, h);
    const double diag = std::sqrt(static_cast<double>(w * w + h * h));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double t = 0.5 + (gx * x + gy * y) / diag;  // gradient coordinate
            const double tex =
                p.texture_amp * std::sin(2.0 * 3.14159265358979323846 * (tx * x + ty * y) +
                                         tex_phase);
            for (int c = 0; c < 3; ++c) {
                const double base = c0[c] + (c1[c] - c0[c]) * std::clamp(t, 0.0, 1.0);
                hq.at(y, x, c) = std::clamp(base + tex, 0.02, 0.98);
            }
            // degrade: crush toward mid, then push red up / blue down with a
            // spatially oscillating strength
            const double cast =
                p.cast_base + p.cast_amp * std::sin(2.0 * 3.14159265358979323846 *
                                                        (cx * x + cy * y) +
                                                    cast_phase);
            for (int c = 0; c < 3; ++c) {
                double v = p.crush_mid + (hq.at(y, x, c) - p.crush_mid) * p.crush_keep;
                if (c == 0) v += cast;
                if (c == 2) v -= 0.8 * cast;
                lq.at(y, x, c) = std::clamp(v, 0.0, 1.0);
            }
        }
    }

    ToySource src;
    src.id = "toy" + std::to_string(seed);
    src.hq = hq;
    src.lq = lq;
    // raw sits between the endpoints
    src.raw = uwiq::ImageRGB(w, h);
    for (std::size_t i = 0; i < src.raw.data.size(); ++i) {
        src.raw.data[i] = 0.45 * hq.data[i] + 0.55 * lq.data[i];
    }
    return src;
}

}  // namespace testsup
