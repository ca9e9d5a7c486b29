#pragma once

#include <cstddef>
#include <vector>

// Data-parallel compute kernels. Each kernel exists twice: a plain serial
// reference under kern::serial and an OpenMP version under kern::omp with
// the identical per-element arithmetic. Reductions accumulate fixed-size
// chunk partials in a fixed order in both versions, so results are
// bit-identical for any thread count. The unqualified functions dispatch
// on par::mode().
namespace uwiq::kern {

// Fixed chunk length for deterministic reductions.
inline constexpr std::size_t kReduceChunk = 1024;

// Additive floor keeping block log-contrast finite when a block touches 0.
inline constexpr double kLogContrastFloor = 1e-4;

#define UWIQ_KERNEL_DECLS                                                          \
    /* out = clamp(k*hi + (1-k)*lo) into [min(hi,lo), max(hi,lo)] elementwise */   \
    void lerp_clamped(const double* hi, const double* lo, double k, double* out,   \
                      std::size_t n);                                              \
    /* interleaved RGB -> interleaved Lab / HSV, npx pixels */                     \
    void srgb_to_lab(const double* rgb, double* lab, std::size_t npx);             \
    void srgb_to_hsv(const double* rgb, double* hsv, std::size_t npx);             \
    void luminance_rec601(const double* rgb, double* y, std::size_t npx);          \
    /* 3x3 Sobel gradient magnitude on a single plane, replicated border */        \
    void sobel_magnitude(const double* plane, int h, int w, double* mag);          \
    /* sum(log((max+f)/(min+f))) * 2/nblocks over complete block x block tiles */  \
    double block_log_contrast(const double* plane, int h, int w, int block);       \
    /* sum(m*log(m)) / nblocks with m = (max-min)/(max+min) Michelson contrast */  \
    double block_michelson_entropy(const double* plane, int h, int w, int block);  \
    /* chunked deterministic reductions */                                         \
    double sum(const double* v, std::size_t n);                                    \
    double sum_sq_dev(const double* v, std::size_t n, double mu);                  \
    /* planar CHW conv stack, 3x3-style same padding, stride 1 */                  \
    void conv2d_same(const double* in, int ci, int h, int w, const double* wgt,    \
                     const double* bias, int co, int k, double* out);              \
    void conv2d_same_grad_input(const double* gout, int co, int h, int w,          \
                                const double* wgt, int ci, int k, double* gin);    \
    void conv2d_same_grad_params(const double* gout, int co, int h, int w,         \
                                 const double* in, int ci, int k, double* gw,      \
                                 double* gb);                                      \
    /* 2x2 max pooling, stride 2; argmax keeps the first maximum in scan order */  \
    void maxpool2(const double* in, int c, int h, int w, double* out, int* argmax);\
    void maxpool2_grad(const double* gout, int c, int ho, int wo,                  \
                       const int* argmax, double* gin, std::size_t gin_n);         \
    /* channel-wise global average pool: out[c] = mean of plane c */               \
    void gap(const double* in, int c, int h, int w, double* out);                  \
    void relu(const double* in, double* out, std::size_t n);                       \
    void relu_grad(const double* pre, const double* gout, double* gin,             \
                   std::size_t n);

namespace serial {
UWIQ_KERNEL_DECLS
}
namespace omp {
UWIQ_KERNEL_DECLS
}
UWIQ_KERNEL_DECLS

#undef UWIQ_KERNEL_DECLS

}  // namespace uwiq::kern
