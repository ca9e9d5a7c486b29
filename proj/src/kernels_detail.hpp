#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "uwiq/kernels.hpp"

// Per-element arithmetic shared verbatim by the serial and OpenMP kernel
// variants; the variants differ only in how the loops are driven.
namespace uwiq::kern::detail {

inline double lerp_px(double hi, double lo, double k) {
    const double v = k * hi + (1.0 - k) * lo;
    return std::clamp(v, std::min(hi, lo), std::max(hi, lo));
}

// ---- color ----------------------------------------------------------

inline double srgb_linearize(double c) {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

inline double lab_f(double t) {
    constexpr double d = 6.0 / 29.0;
    constexpr double d3 = d * d * d;
    return t > d3 ? std::cbrt(t) : t / (3.0 * d * d) + 4.0 / 29.0;
}

// sRGB D65 reference: matrix rows and the matching white point.
inline constexpr double kXyz[9] = {0.4124564, 0.3575761, 0.1804375,
                                   0.2126729, 0.7151522, 0.0721750,
                                   0.0193339, 0.1191920, 0.9503041};
inline constexpr double kWhite[3] = {0.95047, 1.0, 1.08883};

inline void lab_px(const double* rgb, double* lab) {
    const double r = srgb_linearize(rgb[0]);
    const double g = srgb_linearize(rgb[1]);
    const double b = srgb_linearize(rgb[2]);
    const double x = kXyz[0] * r + kXyz[1] * g + kXyz[2] * b;
    const double y = kXyz[3] * r + kXyz[4] * g + kXyz[5] * b;
    const double z = kXyz[6] * r + kXyz[7] * g + kXyz[8] * b;
    const double fx = lab_f(x / kWhite[0]);
    const double ty = y / kWhite[1];
    const double fy = lab_f(ty);
    const double fz = lab_f(z / kWhite[2]);
    // The kappa form keeps L(black) at exactly 0; clamping pins L(white)
    // to exactly 100 (the matrix rows sum to 1 + 1e-7).
    constexpr double d = 6.0 / 29.0;
    const double L = ty > d * d * d ? 116.0 * std::cbrt(ty) - 16.0
                                    : ty * (24389.0 / 27.0);
    lab[0] = std::clamp(L, 0.0, 100.0);
    lab[1] = 500.0 * (fx - fy);
    lab[2] = 200.0 * (fy - fz);
}

inline void hsv_px(const double* rgb, double* hsv) {
    const double r = rgb[0], g = rgb[1], b = rgb[2];
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double delta = mx - mn;
    double h = 0.0;
    if (delta > 0.0) {
        if (mx == r) {
            h = 60.0 * ((g - b) / delta);
        } else if (mx == g) {
            h = 60.0 * ((b - r) / delta + 2.0);
        } else {
            h = 60.0 * ((r - g) / delta + 4.0);
        }
        if (h < 0.0) h += 360.0;
        if (h >= 360.0) h -= 360.0;
    }
    hsv[0] = h;
    hsv[1] = mx > 0.0 ? delta / mx : 0.0;
    hsv[2] = mx;
}

inline double luma_px(const double* rgb) {
    return 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
}

// ---- stencils and blocks --------------------------------------------

inline double plane_clamped(const double* p, int h, int w, int y, int x) {
    y = std::clamp(y, 0, h - 1);
    x = std::clamp(x, 0, w - 1);
    return p[static_cast<std::size_t>(y) * w + x];
}

inline double sobel_px(const double* p, int h, int w, int y, int x) {
    const double tl = plane_clamped(p, h, w, y - 1, x - 1);
    const double tc = plane_clamped(p, h, w, y - 1, x);
    const double tr = plane_clamped(p, h, w, y - 1, x + 1);
    const double ml = plane_clamped(p, h, w, y, x - 1);
    const double mr = plane_clamped(p, h, w, y, x + 1);
    const double bl = plane_clamped(p, h, w, y + 1, x - 1);
    const double bc = plane_clamped(p, h, w, y + 1, x);
    const double br = plane_clamped(p, h, w, y + 1, x + 1);
    const double gx = (tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl);
    const double gy = (bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr);
    return std::sqrt(gx * gx + gy * gy);
}

inline void block_min_max(const double* p, int w, int y0, int x0, int block,
                          double* mn, double* mx) {
    double lo = p[static_cast<std::size_t>(y0) * w + x0];
    double hi = lo;
    for (int y = y0; y < y0 + block; ++y) {
        const double* row = p + static_cast<std::size_t>(y) * w;
        for (int x = x0; x < x0 + block; ++x) {
            lo = std::min(lo, row[x]);
            hi = std::max(hi, row[x]);
        }
    }
    *mn = lo;
    *mx = hi;
}

inline double log_contrast_block(const double* p, int w, int y0, int x0, int block) {
    double mn, mx;
    block_min_max(p, w, y0, x0, block, &mn, &mx);
    if (mx == mn) return 0.0;
    return std::log((mx + kLogContrastFloor) / (mn + kLogContrastFloor));
}

inline double michelson_entropy_block(const double* p, int w, int y0, int x0,
                                      int block) {
    double mn, mx;
    block_min_max(p, w, y0, x0, block, &mn, &mx);
    const double top = mx - mn;
    const double bot = mx + mn;
    if (top <= 0.0 || bot <= 0.0) return 0.0;
    const double m = top / bot;
    return m * std::log(m);
}

// ---- reductions ------------------------------------------------------

inline double chunk_sum(const double* v, std::size_t begin, std::size_t end) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += v[i];
    return s;
}

inline double chunk_sum_sq_dev(const double* v, std::size_t begin, std::size_t end,
                               double mu) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        const double d = v[i] - mu;
        s += d * d;
    }
    return s;
}

inline std::size_t chunk_count(std::size_t n) {
    return (n + kReduceChunk - 1) / kReduceChunk;
}

// ---- conv stack ------------------------------------------------------

inline double conv_out_px(const double* in, int ci_n, int h, int w,
                          const double* wgt, const double* bias, int co, int k,
                          int y, int x) {
    const int p = (k - 1) / 2;
    double acc = bias[co];
    for (int ci = 0; ci < ci_n; ++ci) {
        const double* plane = in + static_cast<std::size_t>(ci) * h * w;
        const double* wk = wgt + (static_cast<std::size_t>(co) * ci_n + ci) * k * k;
        for (int kh = 0; kh < k; ++kh) {
            const int yy = y + kh - p;
            if (yy < 0 || yy >= h) continue;
            for (int kw = 0; kw < k; ++kw) {
                const int xx = x + kw - p;
                if (xx < 0 || xx >= w) continue;
                acc += plane[static_cast<std::size_t>(yy) * w + xx] * wk[kh * k + kw];
            }
        }
    }
    return acc;
}

inline double conv_gin_px(const double* gout, int co_n, int h, int w,
                          const double* wgt, int ci_n, int k, int ci, int iy,
                          int ix) {
    const int p = (k - 1) / 2;
    double acc = 0.0;
    for (int co = 0; co < co_n; ++co) {
        const double* gplane = gout + static_cast<std::size_t>(co) * h * w;
        const double* wk = wgt + (static_cast<std::size_t>(co) * ci_n + ci) * k * k;
        for (int kh = 0; kh < k; ++kh) {
            const int y = iy + p - kh;
            if (y < 0 || y >= h) continue;
            for (int kw = 0; kw < k; ++kw) {
                const int x = ix + p - kw;
                if (x < 0 || x >= w) continue;
                acc += gplane[static_cast<std::size_t>(y) * w + x] * wk[kh * k + kw];
            }
        }
    }
    return acc;
}

// Weight and bias gradients owned by one output channel; scan order over
// (y, x) is fixed so accumulation is deterministic.
inline void conv_gparams_channel(const double* gout, int co, int h, int w,
                                 const double* in, int ci_n, int k, double* gw,
                                 double* gb) {
    const int p = (k - 1) / 2;
    const double* gplane = gout + static_cast<std::size_t>(co) * h * w;
    double* gwk = gw + static_cast<std::size_t>(co) * ci_n * k * k;
    double bias_acc = 0.0;
    for (int y = 0; y < h; ++y) {
        double row_bias = 0.0;
        for (int x = 0; x < w; ++x) {
            const double g = gplane[static_cast<std::size_t>(y) * w + x];
            row_bias += g;
            if (g == 0.0) continue;
            for (int ci = 0; ci < ci_n; ++ci) {
                const double* plane = in + static_cast<std::size_t>(ci) * h * w;
                double* gk = gwk + static_cast<std::size_t>(ci) * k * k;
                for (int kh = 0; kh < k; ++kh) {
                    const int yy = y + kh - p;
                    if (yy < 0 || yy >= h) continue;
                    for (int kw = 0; kw < k; ++kw) {
                        const int xx = x + kw - p;
                        if (xx < 0 || xx >= w) continue;
                        gk[kh * k + kw] += g * plane[static_cast<std::size_t>(yy) * w + xx];
                    }
                }
            }
        }
        bias_acc += row_bias;
    }
    gb[co] = bias_acc;
}

inline void pool_cell(const double* in, int h, int w, int ho, int wo, int ch,
                      int oy, int ox, double* out, int* argmax) {
    const double* plane = in + static_cast<std::size_t>(ch) * h * w;
    const int y0 = 2 * oy, x0 = 2 * ox;
    double best = plane[static_cast<std::size_t>(y0) * w + x0];
    int besty = y0, bestx = x0;
    for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
            const double v = plane[static_cast<std::size_t>(y0 + dy) * w + (x0 + dx)];
            if (v > best) {
                best = v;
                besty = y0 + dy;
                bestx = x0 + dx;
            }
        }
    }
    const std::size_t oidx = (static_cast<std::size_t>(ch) * ho + oy) * wo + ox;
    out[oidx] = best;
    argmax[oidx] = static_cast<int>((static_cast<std::size_t>(ch) * h + besty) * w + bestx);
}

inline double plane_mean(const double* plane, std::size_t n) {
    const std::size_t nc = chunk_count(n);
    double total = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
        total += chunk_sum(plane, c * kReduceChunk, std::min(n, (c + 1) * kReduceChunk));
    }
    return total / static_cast<double>(n);
}

}  // namespace uwiq::kern::detail
