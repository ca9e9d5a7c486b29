#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uwiq/image.hpp"
#include "uwiq/rng.hpp"

namespace uwiq {

// Two mixing ratios plus the ranking label they imply. gamma = +1 when
// k1 < k2 (second image ranks higher), -1 when k1 > k2.
struct MixRatioPair {
    double k1 = 0.0;
    double k2 = 0.0;
    int gamma = 0;
};

// A training sample: two blends of the same high/low quality pair whose
// ordering is known from the ratios alone.
struct RankedPair {
    ImageRGB x1;
    ImageRGB x2;
    int gamma = 0;
};

// One graded image of a synthetic test group.
struct SyntheticGrade {
    std::string source_id;
    double k = 0.0;
    ImageRGB image;
    int gt_rank = 0;  // 1-based, increasing with k
};

struct SynthSource {
    std::string id;
    ImageRGB high;
    ImageRGB low;
};

// Draws k1, k2 i.i.d. uniform on [0,1], rejecting until |k1-k2| >= 0.1.
// One sampler per training loop; not shared across threads.
class RatioSampler {
public:
    explicit RatioSampler(std::uint64_t seed) : rng_(seed) {}
    explicit RatioSampler(Rng& rng) : ext_(&rng), rng_(0) {}

    MixRatioPair sample();

    static constexpr double kMinGap = 0.1;

private:
    Rng* ext_ = nullptr;
    Rng rng_;
};

// Per-channel convex blend: out = k*hq + (1-k)*lq, clamped elementwise into
// [min(hq,lq), max(hq,lq)]. Throws on dimension mismatch or k outside [0,1].
ImageRGB mix(const ImageRGB& hq, const ImageRGB& lq, double k);

RankedPair make_ranked_pair(const ImageRGB& hq, const ImageRGB& lq,
                            const MixRatioPair& ratios);

// One grade per (source, k); ks must be non-empty, strictly increasing,
// each in [0,1]. gt_rank is the 1-based position in ks.
std::vector<SyntheticGrade> build_synthetic_testset(
    const std::vector<SynthSource>& sources, const std::vector<double>& ks);

}  // namespace uwiq
