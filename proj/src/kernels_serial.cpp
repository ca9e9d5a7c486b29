#include <algorithm>
#include <cstring>
#include <vector>

#include "kernels_detail.hpp"
#include "uwiq/kernels.hpp"

namespace uwiq::kern::serial {

void lerp_clamped(const double* hi, const double* lo, double k, double* out,
                  std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = detail::lerp_px(hi[i], lo[i], k);
}

void srgb_to_lab(const double* rgb, double* lab, std::size_t npx) {
    for (std::size_t i = 0; i < npx; ++i) detail::lab_px(rgb + 3 * i, lab + 3 * i);
}

void srgb_to_hsv(const double* rgb, double* hsv, std::size_t npx) {
    for (std::size_t i = 0; i < npx; ++i) detail::hsv_px(rgb + 3 * i, hsv + 3 * i);
}

void luminance_rec601(const double* rgb, double* y, std::size_t npx) {
    for (std::size_t i = 0; i < npx; ++i) y[i] = detail::luma_px(rgb + 3 * i);
}

void sobel_magnitude(const double* plane, int h, int w, double* mag) {
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            mag[static_cast<std::size_t>(y) * w + x] = detail::sobel_px(plane, h, w, y, x);
        }
    }
}

double block_log_contrast(const double* plane, int h, int w, int block) {
    const int bh = h / block, bw = w / block;
    if (bh <= 0 || bw <= 0) return 0.0;
    std::vector<double> vals(static_cast<std::size_t>(bh) * bw);
    for (int by = 0; by < bh; ++by) {
        for (int bx = 0; bx < bw; ++bx) {
            vals[static_cast<std::size_t>(by) * bw + bx] =
                detail::log_contrast_block(plane, w, by * block, bx * block, block);
        }
    }
    double total = 0.0;
    for (double v : vals) total += v;
    return total * 2.0 / (static_cast<double>(bh) * bw);
}

double block_michelson_entropy(const double* plane, int h, int w, int block) {
    const int bh = h / block, bw = w / block;
    if (bh <= 0 || bw <= 0) return 0.0;
    std::vector<double> vals(static_cast<std::size_t>(bh) * bw);
    for (int by = 0; by < bh; ++by) {
        for (int bx = 0; bx < bw; ++bx) {
            vals[static_cast<std::size_t>(by) * bw + bx] =
                detail::michelson_entropy_block(plane, w, by * block, bx * block, block);
        }
    }
    double total = 0.0;
    for (double v : vals) total += v;
    return total / (static_cast<double>(bh) * bw);
}

double sum(const double* v, std::size_t n) {
    const std::size_t nc = detail::chunk_count(n);
    double total = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
        total += detail::chunk_sum(v, c * kReduceChunk, std::min(n, (c + 1) * kReduceChunk));
    }
    return total;
}

double sum_sq_dev(const double* v, std::size_t n, double mu) {
    const std::size_t nc = detail::chunk_count(n);
    double total = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
        total += detail::chunk_sum_sq_dev(v, c * kReduceChunk,
                                          std::min(n, (c + 1) * kReduceChunk), mu);
    }
    return total;
}

void conv2d_same(const double* in, int ci, int h, int w, const double* wgt,
                 const double* bias, int co, int k, double* out) {
    for (int oc = 0; oc < co; ++oc) {
        for (int y = 0; y < h; ++y) {
            double* orow = out + (static_cast<std::size_t>(oc) * h + y) * w;
            for (int x = 0; x < w; ++x) {
                orow[x] = detail::conv_out_px(in, ci, h, w, wgt, bias, oc, k, y, x);
            }
        }
    }
}

void conv2d_same_grad_input(const double* gout, int co, int h, int w,
                            const double* wgt, int ci, int k, double* gin) {
    for (int ic = 0; ic < ci; ++ic) {
        for (int y = 0; y < h; ++y) {
            double* grow = gin + (static_cast<std::size_t>(ic) * h + y) * w;
            for (int x = 0; x < w; ++x) {
                grow[x] = detail::conv_gin_px(gout, co, h, w, wgt, ci, k, ic, y, x);
            }
        }
    }
}

void conv2d_same_grad_params(const double* gout, int co, int h, int w,
                             const double* in, int ci, int k, double* gw,
                             double* gb) {
    std::memset(gw, 0, static_cast<std::size_t>(co) * ci * k * k * sizeof(double));
    for (int oc = 0; oc < co; ++oc) {
        detail::conv_gparams_channel(gout, oc, h, w, in, ci, k, gw, gb);
    }
}

void maxpool2(const double* in, int c, int h, int w, double* out, int* argmax) {
    const int ho = h / 2, wo = w / 2;
    for (int ch = 0; ch < c; ++ch) {
        for (int oy = 0; oy < ho; ++oy) {
            for (int ox = 0; ox < wo; ++ox) {
                detail::pool_cell(in, h, w, ho, wo, ch, oy, ox, out, argmax);
            }
        }
    }
}

void maxpool2_grad(const double* gout, int c, int ho, int wo, const int* argmax,
                   double* gin, std::size_t gin_n) {
    std::memset(gin, 0, gin_n * sizeof(double));
    const std::size_t n = static_cast<std::size_t>(c) * ho * wo;
    for (std::size_t i = 0; i < n; ++i) gin[argmax[i]] += gout[i];
}

void gap(const double* in, int c, int h, int w, double* out) {
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (int ch = 0; ch < c; ++ch) {
        out[ch] = detail::plane_mean(in + ch * plane, plane);
    }
}

void relu(const double* in, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void relu_grad(const double* pre, const double* gout, double* gin, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) gin[i] = pre[i] > 0.0 ? gout[i] : 0.0;
}

}  // namespace uwiq::kern::serial
