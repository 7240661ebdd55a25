#include "synthweave/scott_knott.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace synthweave::stats {

std::size_t RankGroups::rank_of(const std::string& id) const {
    for (std::size_t r = 0; r < ranks.size(); ++r)
        for (const auto& g : ranks[r])
            if (g.id == id) return r + 1;
    return 0;
}

double cliffs_delta(const std::vector<double>& c1, const std::vector<double>& c2) {
    if (c1.empty() || c2.empty()) throw std::invalid_argument("cliffs_delta: empty list");
    long long acc = 0;
    for (double x : c1)
        for (double y : c2) {
            if (x > y) ++acc;
            else if (x < y) --acc;
        }
    return static_cast<double>(acc) /
           (static_cast<double>(c1.size()) * static_cast<double>(c2.size()));
}

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> concat_scores(const std::vector<ScoreGroup>& groups, std::size_t lo,
                                  std::size_t hi) {
    std::vector<double> out;
    for (std::size_t i = lo; i < hi; ++i)
        out.insert(out.end(), groups[i].scores.begin(), groups[i].scores.end());
    return out;
}

/// Partitions groups[lo, hi) into contiguous runs, appending them to
/// `runs` in ascending-mean order.
void partition(const std::vector<ScoreGroup>& sorted, std::size_t lo, std::size_t hi,
               std::vector<std::pair<std::size_t, std::size_t>>& runs) {
    if (hi - lo <= 1) {
        runs.emplace_back(lo, hi);
        return;
    }
    const auto all = concat_scores(sorted, lo, hi);
    const double mu = mean_of(all);
    const auto total = static_cast<double>(all.size());

    double best_e = -1.0;
    std::size_t best_cut = lo;
    for (std::size_t cut = lo + 1; cut < hi; ++cut) {
        const auto left = concat_scores(sorted, lo, cut);
        const auto right = concat_scores(sorted, cut, hi);
        const double e = (static_cast<double>(left.size()) * std::fabs(mean_of(left) - mu) +
                          static_cast<double>(right.size()) * std::fabs(mean_of(right) - mu)) /
                         total;
        if (e > best_e) {  // strict: the leftmost maximizing cut wins
            best_e = e;
            best_cut = cut;
        }
    }

    const auto left = concat_scores(sorted, lo, best_cut);
    const auto right = concat_scores(sorted, best_cut, hi);
    if (std::fabs(cliffs_delta(left, right)) >= kCliffsSmallEffect) {
        partition(sorted, lo, best_cut, runs);
        partition(sorted, best_cut, hi, runs);
    } else {
        runs.emplace_back(lo, hi);
    }
}

}  // namespace

RankGroups scott_knott(const std::vector<ScoreGroup>& groups, bool bigger_is_better) {
    if (groups.empty()) throw std::invalid_argument("scott_knott: no groups");
    for (const auto& g : groups)
        if (g.scores.empty())
            throw std::invalid_argument("scott_knott: group '" + g.id + "' has no scores");

    std::vector<ScoreGroup> sorted(groups);
    std::sort(sorted.begin(), sorted.end(), [](const ScoreGroup& a, const ScoreGroup& b) {
        const double ma = mean_of(a.scores);
        const double mb = mean_of(b.scores);
        if (ma != mb) return ma < mb;
        if (a.scores != b.scores) return a.scores < b.scores;
        return a.id < b.id;
    });

    std::vector<std::pair<std::size_t, std::size_t>> runs;
    partition(sorted, 0, sorted.size(), runs);

    RankGroups out;
    out.ranks.reserve(runs.size());
    for (const auto& [lo, hi] : runs)
        out.ranks.emplace_back(sorted.begin() + static_cast<std::ptrdiff_t>(lo),
                               sorted.begin() + static_cast<std::ptrdiff_t>(hi));
    if (bigger_is_better) std::reverse(out.ranks.begin(), out.ranks.end());
    return out;
}

}  // namespace synthweave::stats
