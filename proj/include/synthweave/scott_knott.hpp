#pragma once

#include <string>
#include <vector>

namespace synthweave::stats {

struct ScoreGroup {
    std::string id;
    std::vector<double> scores;
};

/// Ordered rank partition; ranks[0] is rank 1 (best under the requested
/// polarity). Every input group lands in exactly one rank.
struct RankGroups {
    std::vector<std::vector<ScoreGroup>> ranks;

    /// 1-based rank of a group id, 0 if absent.
    std::size_t rank_of(const std::string& id) const;
};

/// Dominance effect size: mean of sign(x - y) over all pairs, exact
/// enumeration. Antisymmetric; invariant under strictly increasing
/// transforms of both lists.
double cliffs_delta(const std::vector<double>& c1, const std::vector<double>& c2);

/// Effect sizes at or above this magnitude are treated as non-small.
constexpr double kCliffsSmallEffect = 0.147;

/// Recursive rank partition: groups are sorted by mean score, the
/// contiguous cut maximizing the expected mean delta
///   E = (l(C1)*|mu(C1)-mu(C)| + l(C2)*|mu(C2)-mu(C)|) / l(C)
/// (lengths and means over the concatenated scores) is accepted when the
/// two sides differ by a non-small |cliffs_delta|, and the recursion
/// continues into each side. Ties in the cut search resolve to the
/// leftmost cut; group sorting breaks mean ties on content and then id,
/// so the outcome never depends on input order.
RankGroups scott_knott(const std::vector<ScoreGroup>& groups, bool bigger_is_better);

}  // namespace synthweave::stats
