#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "synthweave/dataset.hpp"

namespace synthweave::rrp {

/// Tuning knobs for the recursive-projection generator.
struct RrpConfig {
    std::size_t leaf_threshold = 12;  ///< max rows per leaf cluster (t)
    double scale_factor = 0.8;        ///< difference scaling factor F in [0,1]
    double crossover_prob = 0.9;      ///< crossover probability CR in [0,1]
    double distance_p = 2.0;          ///< Minkowski exponent for row distances

    void validate() const;  // t >= 2, F and CR in [0,1], p > 0
};

/// Binary tree of row-index sets. A node with children partitions its set;
/// leaves hold at most the configured threshold.
struct ClusterNode {
    std::vector<std::uint32_t> indices;
    std::unique_ptr<ClusterNode> left;
    std::unique_ptr<ClusterNode> right;

    bool is_leaf() const { return !left; }
};

/// Distance evaluation context for clustering. `distance_calls` counts
/// every row-pair evaluation, which the structural tests use to check the
/// per-split and whole-tree budgets. pack() snapshots the normalized
/// features into one flat buffer so the split scans stream memory
/// sequentially; packed and unpacked evaluation compute the identical
/// value.
struct DistanceContext {
    const Table* table = nullptr;
    const Scaler* scaler = nullptr;
    double p = 2.0;
    mutable std::uint64_t distance_calls = 0;

    std::vector<double> packed;  ///< row-major normalized cells, NaN = missing
    std::size_t width = 0;
    /// p == 2, all columns numeric, no missing cells: the scans can run a
    /// plain sum-of-squares loop that is bit-identical to the general path
    bool fast_euclidean = false;

    void pack();

    double operator()(std::uint32_t i, std::uint32_t j) const {
        if (!packed.empty()) return packed_distance(i, j);
        return row_distance(table->row(i), table->row(j), table->schema(), *scaler, p);
    }

    double packed_distance(std::uint32_t i, std::uint32_t j) const;
};

/// Cosine-rule projection of a point onto the pivot axis: `a` and `b` are
/// its distances to the two pivots, `c` the pivot separation (> 0).
inline double fastmap_projection(double a, double b, double c) {
    return (a * a + c * c - b * b) / (2.0 * c);
}

struct SplitResult {
    std::vector<std::uint32_t> east;
    std::vector<std::uint32_t> west;
    bool degenerate = false;  ///< pivots coincided; halved by index order
};

/// One projection bisection: random pivot, two farthest-point scans, one
/// projection pass (at most 3*|indices| distance evaluations), then the
/// rows sorted by projection are halved, east taking ceil(n/2).
/// Throws if |indices| < 2.
SplitResult split(const std::vector<std::uint32_t>& indices, const DistanceContext& ctx, Rng& rng);

/// Recursive bisection until every leaf holds at most `leaf_threshold`
/// rows. Degenerate sets (zero pivot separation) are halved by index
/// order, so the recursion always terminates with bounded leaves.
std::unique_ptr<ClusterNode> cluster(std::vector<std::uint32_t> indices,
                                     const DistanceContext& ctx, std::size_t leaf_threshold,
                                     Rng& rng);

/// Leaves in stable (depth-first, east-before-west) order.
std::vector<const ClusterNode*> collect_leaves(const ClusterNode& root);

/// Largest-remainder split of `n_out` over the leaf sizes; ties go to the
/// earlier leaf. Sums exactly to n_out.
std::vector<std::size_t> allocate_proportional(const std::vector<std::size_t>& leaf_sizes,
                                               std::size_t n_out);

/// Generates `n_out` rows: clusters the table, assigns output counts to
/// leaves proportionally, and within each leaf builds rows by
/// difference-vector mutation with binomial crossover. One coordinate
/// (the forced index) always mutates. Numeric outputs are clamped to the
/// column's observed range; categorical coordinates take the donor value
/// when mutating. Deterministic in (table, config, seed); leaves are
/// synthesized in parallel from per-leaf sub-seeds.
Table synthesize(const Table& t, std::size_t n_out, const RrpConfig& config, std::uint64_t seed);

}  // namespace synthweave::rrp
