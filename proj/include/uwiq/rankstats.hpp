#pragma once

#include <string>
#include <vector>

namespace uwiq {

struct RankedItem {
    std::string item_id;
    double score = 0.0;
    int gt_rank = 0;  // ground-truth rank, a permutation of 1..n per group
};

struct Ranking {
    std::string group_id;
    std::vector<RankedItem> items;
};

struct GroupCorrelation {
    std::string group_id;
    double krcc = 0.0;
    double srcc = 0.0;
};

struct RankingReport {
    std::vector<GroupCorrelation> groups;
    double mean_krcc = 0.0;
    double std_krcc = 0.0;  // population std across groups
    double mean_srcc = 0.0;
    double std_srcc = 0.0;
};

// Kendall tau-a: (concordant - discordant) / (n(n-1)/2) over all unordered
// pairs. A pair with tied scores counts toward neither side. gt_ranks must
// be a permutation of 1..n, n >= 2.
double krcc(const std::vector<double>& scores, const std::vector<int>& gt_ranks);

// Spearman: 1 - 6*sum(d^2) / (n(n^2-1)) with d = score_rank - gt_rank and
// average ranks for tied scores.
double srcc(const std::vector<double>& scores, const std::vector<int>& gt_ranks);

RankingReport evaluate_groups(const std::vector<Ranking>& rankings);

}  // namespace uwiq
