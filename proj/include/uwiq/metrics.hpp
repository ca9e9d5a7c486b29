#pragma once

#include "uwiq/image.hpp"

namespace uwiq {

// Combination weights for the colorfulness / sharpness / contrast measure.
// Defaults are the community-standard constants for underwater imagery.
struct UiqmWeights {
    double c1 = 0.0282;
    double c2 = 0.2953;
    double c3 = 3.5753;
};

// Combination weights for chroma std / luminance contrast / mean saturation.
struct UciqeWeights {
    double c1 = 0.4680;
    double c2 = 0.2745;
    double c3 = 0.2576;
};

struct MetricBreakdown {
    double uicm = 0.0;          // colorfulness (opponent-channel statistics)
    double uism = 0.0;          // sharpness (Sobel-weighted block log-contrast)
    double uiconm = 0.0;        // contrast (block Michelson entropy on luma)
    double sigma_chroma = 0.0;  // population std of CIELab chroma
    double con_l = 0.0;         // L percentile spread (99th - 1st)
    double mu_s = 0.0;          // mean HSV saturation
    double uiqm = 0.0;
    double uciqe = 0.0;
};

// Percentile pair defining the luminance-contrast spread con_l.
struct ConLPercentiles {
    double lo = 0.01;
    double hi = 0.99;
};

double uicm(const ImageRGB& img);
double uism(const ImageRGB& img);
double uiconm(const ImageRGB& img);

// Full breakdown with both linear combinations.
MetricBreakdown score_image(const ImageRGB& img, const UiqmWeights& uw = {},
                            const UciqeWeights& cw = {},
                            const ConLPercentiles& pct = {});

MetricBreakdown uiqm(const ImageRGB& img, const UiqmWeights& w = {});
MetricBreakdown uciqe(const ImageRGB& img, const UciqeWeights& w = {},
                      const ConLPercentiles& pct = {});

}  // namespace uwiq
