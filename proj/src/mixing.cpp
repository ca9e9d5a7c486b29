#include "uwiq/mixing.hpp"

#include <cmath>
#include <stdexcept>

#include "uwiq/kernels.hpp"

namespace uwiq {

MixRatioPair RatioSampler::sample() {
    Rng& rng = ext_ ? *ext_ : rng_;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const double k1 = rng.uniform();
        const double k2 = rng.uniform();
        if (std::abs(k1 - k2) < kMinGap) continue;
        return MixRatioPair{k1, k2, k1 < k2 ? +1 : -1};
    }
    // A healthy uniform source rejects with probability ~0.19 per draw.
    throw std::runtime_error("ratio sampler exceeded 1000 attempts; rng is broken");
}

ImageRGB mix(const ImageRGB& hq, const ImageRGB& lq, double k) {
    require_valid(hq);
    require_valid(lq);
    if (hq.width != lq.width || hq.height != lq.height) {
        throw std::invalid_argument("mix: image dimensions differ");
    }
    if (!(k >= 0.0 && k <= 1.0)) {
        throw std::invalid_argument("mix: ratio must lie in [0,1]");
    }
    ImageRGB out(hq.width, hq.height);
    kern::lerp_clamped(hq.data.data(), lq.data.data(), k, out.data.data(),
                       out.data.size());
    return out;
}

RankedPair make_ranked_pair(const ImageRGB& hq, const ImageRGB& lq,
                            const MixRatioPair& ratios) {
    if (std::abs(ratios.k1 - ratios.k2) < RatioSampler::kMinGap) {
        throw std::invalid_argument("ranked pair: ratios closer than the minimum gap");
    }
    if (ratios.gamma != (ratios.k1 < ratios.k2 ? +1 : -1)) {
        throw std::invalid_argument("ranked pair: gamma inconsistent with the ratios");
    }
    RankedPair pair;
    pair.x1 = mix(hq, lq, ratios.k1);
    pair.x2 = mix(hq, lq, ratios.k2);
    pair.gamma = ratios.gamma;
    return pair;
}

std::vector<SyntheticGrade> build_synthetic_testset(
    const std::vector<SynthSource>& sources, const std::vector<double>& ks) {
    if (ks.empty()) throw std::invalid_argument("synthetic testset: empty ratio list");
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (!(ks[i] >= 0.0 && ks[i] <= 1.0)) {
            throw std::invalid_argument("synthetic testset: ratios must lie in [0,1]");
        }
        if (i > 0 && !(ks[i] > ks[i - 1])) {
            throw std::invalid_argument("synthetic testset: ratios must strictly increase");
        }
    }
    std::vector<SyntheticGrade> grades;
    grades.reserve(sources.size() * ks.size());
    for (const SynthSource& src : sources) {
        for (std::size_t i = 0; i < ks.size(); ++i) {
            SyntheticGrade g;
            g.source_id = src.id;
            g.k = ks[i];
            g.image = mix(src.high, src.low, ks[i]);
            g.gt_rank = static_cast<int>(i) + 1;
            grades.push_back(std::move(g));
        }
    }
    return grades;
}

}  // namespace uwiq
