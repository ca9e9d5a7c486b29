#include "uwiq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "uwiq/kernels.hpp"

namespace uwiq {

namespace {

constexpr int kBlock = 8;  // block side for the sharpness/contrast measures

// UICM combination constants and the Rec.601 channel weights for UISM.
constexpr double kUicmMu = -0.0268;
constexpr double kUicmSigma = 0.1586;
constexpr double kUismLambda[3] = {0.299, 0.587, 0.114};

struct TrimmedStats {
    double mean = 0.0;
    double var = 0.0;  // over all values, relative to the trimmed mean
};

// Asymmetric alpha-trimmed statistics with alpha = 1/10 on both tails,
// computed in exact integer index arithmetic. The input is sorted in
// place; accumulating over the sorted order makes the result invariant
// under any permutation of the input pixels.
TrimmedStats trimmed_stats(std::vector<double>& v) {
    const std::size_t n = v.size();
    std::sort(v.begin(), v.end());
    std::size_t tl = (n + 9) / 10;
    std::size_t tr = n / 10;
    if (tl + tr >= n) {
        tl = 0;
        tr = 0;
    }
    const std::size_t kept = n - tl - tr;
    TrimmedStats s;
    s.mean = kern::sum(v.data() + tl, kept) / static_cast<double>(kept);
    s.var = kern::sum_sq_dev(v.data(), n, s.mean) / static_cast<double>(n);
    return s;
}

// Linear-interpolation quantile of a sorted vector, p in [0,1].
double quantile_sorted(const std::vector<double>& v, double p) {
    const std::size_t n = v.size();
    if (n == 1) return v[0];
    const double h = p * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = h - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace

double uicm(const ImageRGB& img) {
    require_valid(img);
    const std::size_t n = img.pixel_count();
    std::vector<double> rg(n), yb(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = img.data[3 * i];
        const double g = img.data[3 * i + 1];
        const double b = img.data[3 * i + 2];
        rg[i] = r - g;
        yb[i] = (r + g) / 2.0 - b;
    }
    const TrimmedStats srg = trimmed_stats(rg);
    const TrimmedStats syb = trimmed_stats(yb);
    return kUicmMu * std::sqrt(srg.mean * srg.mean + syb.mean * syb.mean) +
           kUicmSigma * std::sqrt(srg.var + syb.var);
}

double uism(const ImageRGB& img) {
    require_valid(img);
    const int h = img.height, w = img.width;
    const std::size_t n = img.pixel_count();
    std::vector<double> plane(n), mag(n), weighted(n);
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < n; ++i) plane[i] = img.data[3 * i + c];
        kern::sobel_magnitude(plane.data(), h, w, mag.data());
        // Edge-weighted channel: keep edge strength only where the channel
        // itself has signal.
        for (std::size_t i = 0; i < n; ++i) weighted[i] = mag[i] * plane[i];
        total += kUismLambda[c] * kern::block_log_contrast(weighted.data(), h, w, kBlock);
    }
    return total;
}

double uiconm(const ImageRGB& img) {
    require_valid(img);
    std::vector<double> y(img.pixel_count());
    kern::luminance_rec601(img.data.data(), y.data(), img.pixel_count());
    return kern::block_michelson_entropy(y.data(), img.height, img.width, kBlock);
}

MetricBreakdown score_image(const ImageRGB& img, const UiqmWeights& uw,
                            const UciqeWeights& cw, const ConLPercentiles& pct) {
    require_valid(img);
    if (!(pct.lo >= 0.0 && pct.lo <= 1.0 && pct.hi >= 0.0 && pct.hi <= 1.0 &&
          pct.lo <= pct.hi)) {
        throw std::invalid_argument("con_l percentiles must satisfy 0 <= lo <= hi <= 1");
    }
    MetricBreakdown b;
    b.uicm = uicm(img);
    b.uism = uism(img);
    b.uiconm = uiconm(img);

    const std::size_t n = img.pixel_count();
    std::vector<double> lab(img.data.size());
    kern::srgb_to_lab(img.data.data(), lab.data(), n);

    std::vector<double> chroma(n), lum(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = lab[3 * i + 1];
        const double bb = lab[3 * i + 2];
        chroma[i] = std::sqrt(a * a + bb * bb);
        lum[i] = lab[3 * i];
    }
    const auto [cmin, cmax] = std::minmax_element(chroma.begin(), chroma.end());
    if (*cmin == *cmax) {
        b.sigma_chroma = 0.0;
    } else {
        std::sort(chroma.begin(), chroma.end());
        const double mu = kern::sum(chroma.data(), n) / static_cast<double>(n);
        b.sigma_chroma = std::sqrt(kern::sum_sq_dev(chroma.data(), n, mu) /
                                   static_cast<double>(n));
    }
    std::sort(lum.begin(), lum.end());
    b.con_l = quantile_sorted(lum, pct.hi) - quantile_sorted(lum, pct.lo);

    std::vector<double> hsv(img.data.size());
    kern::srgb_to_hsv(img.data.data(), hsv.data(), n);
    std::vector<double> sat(n);
    for (std::size_t i = 0; i < n; ++i) sat[i] = hsv[3 * i + 1];
    std::sort(sat.begin(), sat.end());
    b.mu_s = kern::sum(sat.data(), n) / static_cast<double>(n);

    b.uiqm = uw.c1 * b.uicm + uw.c2 * b.uism + uw.c3 * b.uiconm;
    b.uciqe = cw.c1 * b.sigma_chroma + cw.c2 * b.con_l + cw.c3 * b.mu_s;
    return b;
}

MetricBreakdown uiqm(const ImageRGB& img, const UiqmWeights& w) {
    return score_image(img, w, UciqeWeights{});
}

MetricBreakdown uciqe(const ImageRGB& img, const UciqeWeights& w,
                      const ConLPercentiles& pct) {
    return score_image(img, UiqmWeights{}, w, pct);
}

}  // namespace uwiq
