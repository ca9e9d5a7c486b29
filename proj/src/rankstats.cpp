#include "uwiq/rankstats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace uwiq {

namespace {

void check_inputs(const std::vector<double>& scores, const std::vector<int>& gt) {
    if (scores.size() != gt.size()) {
        throw std::invalid_argument("rank statistics: length mismatch");
    }
    const std::size_t n = scores.size();
    if (n < 2) throw std::invalid_argument("rank statistics: need at least 2 items");
    std::vector<bool> seen(n, false);
    for (int r : gt) {
        if (r < 1 || static_cast<std::size_t>(r) > n || seen[r - 1]) {
            throw std::invalid_argument("rank statistics: gt_ranks must be a permutation of 1..n");
        }
        seen[r - 1] = true;
    }
}

// Ascending ranks of the scores with average ranks over ties.
std::vector<double> average_ranks(const std::vector<double>& scores) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double population_std(const std::vector<double>& v, double mean) {
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

double krcc(const std::vector<double>& scores, const std::vector<int>& gt_ranks) {
    check_inputs(scores, gt_ranks);
    const std::size_t n = scores.size();
    long concordant = 0, discordant = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (scores[i] == scores[j]) continue;  // score tie counts for neither
            const bool s = scores[i] < scores[j];
            const bool g = gt_ranks[i] < gt_ranks[j];
            if (s == g) {
                ++concordant;
            } else {
                ++discordant;
            }
        }
    }
    return static_cast<double>(concordant - discordant) /
           (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

double srcc(const std::vector<double>& scores, const std::vector<int>& gt_ranks) {
    check_inputs(scores, gt_ranks);
    const std::size_t n = scores.size();
    const std::vector<double> sranks = average_ranks(scores);
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = sranks[i] - static_cast<double>(gt_ranks[i]);
        d2 += d * d;
    }
    const double nn = static_cast<double>(n);
    return 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
}

RankingReport evaluate_groups(const std::vector<Ranking>& rankings) {
    if (rankings.empty()) {
        throw std::invalid_argument("evaluate_groups: no groups");
    }
    RankingReport report;
    std::vector<double> ks, ss;
    for (const Ranking& r : rankings) {
        std::vector<double> scores;
        std::vector<int> gt;
        scores.reserve(r.items.size());
        gt.reserve(r.items.size());
        for (const RankedItem& item : r.items) {
            scores.push_back(item.score);
            gt.push_back(item.gt_rank);
        }
        GroupCorrelation g;
        g.group_id = r.group_id;
        g.krcc = krcc(scores, gt);
        g.srcc = srcc(scores, gt);
        ks.push_back(g.krcc);
        ss.push_back(g.srcc);
        report.groups.push_back(std::move(g));
    }
    const double ng = static_cast<double>(ks.size());
    report.mean_krcc = std::accumulate(ks.begin(), ks.end(), 0.0) / ng;
    report.mean_srcc = std::accumulate(ss.begin(), ss.end(), 0.0) / ng;
    report.std_krcc = population_std(ks, report.mean_krcc);
    report.std_srcc = population_std(ss, report.mean_srcc);
    return report;
}

}  // namespace uwiq
