#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

// Data-parallel inner loops shared by the generators and metrics. Each
// kernel has an OpenMP version (the production path) and a plain-loop
// serial reference with the `_serial` suffix. The two must produce
// bit-identical results: every parallel loop writes disjoint output slots
// and all reductions over those slots run serially in index order, so
// results do not depend on the thread count. tests/ asserts the
// equivalence and tools/bench_kernels compares their runtimes.

namespace synthweave::kernels {

/// Distances from `origin` to every row listed in `subjects`.
/// Dist is callable as dist(row_index_a, row_index_b) -> double.
template <typename Dist>
std::vector<double> distances_from_serial(const std::vector<std::uint32_t>& subjects,
                                          std::uint32_t origin, const Dist& dist) {
    std::vector<double> out(subjects.size());
    for (std::size_t i = 0; i < subjects.size(); ++i) out[i] = dist(subjects[i], origin);
    return out;
}

template <typename Dist>
std::vector<double> distances_from(const std::vector<std::uint32_t>& subjects,
                                   std::uint32_t origin, const Dist& dist) {
    std::vector<double> out(subjects.size());
    const auto n = static_cast<std::int64_t>(subjects.size());
    // entering the OpenMP runtime costs more than a short scan
    if (n >= 4096) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] =
                dist(subjects[static_cast<std::size_t>(i)], origin);
    } else {
        for (std::int64_t i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] =
                dist(subjects[static_cast<std::size_t>(i)], origin);
    }
    return out;
}

/// Index of the largest value; ties break to the smallest index.
inline std::size_t argmax(const std::vector<double>& values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

/// Positions of the k smallest values, ordered by (value, position).
inline std::vector<std::size_t> k_smallest(const std::vector<double>& values, std::size_t k) {
    k = std::min(k, values.size());
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto cmp = [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] < values[b];
        return a < b;
    };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), cmp);
    idx.resize(k);
    return idx;
}

/// For every query row, the nearest candidate row and its distance.
/// Dist is callable as dist(query_index, candidate_index); ties break to
/// the smallest candidate position.
template <typename Dist>
std::vector<std::pair<std::uint32_t, double>> batch_nearest_serial(
    std::size_t n_queries, const std::vector<std::uint32_t>& candidates, const Dist& dist) {
    std::vector<std::pair<std::uint32_t, double>> out(n_queries);
    for (std::size_t q = 0; q < n_queries; ++q) {
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t best_idx = 0;
        for (std::uint32_t c : candidates) {
            const double d = dist(static_cast<std::uint32_t>(q), c);
            if (d < best) {
                best = d;
                best_idx = c;
            }
        }
        out[q] = {best_idx, best};
    }
    return out;
}

template <typename Dist>
std::vector<std::pair<std::uint32_t, double>> batch_nearest(
    std::size_t n_queries, const std::vector<std::uint32_t>& candidates, const Dist& dist) {
    std::vector<std::pair<std::uint32_t, double>> out(n_queries);
    const auto n = static_cast<std::int64_t>(n_queries);
#pragma omp parallel for schedule(static)
    for (std::int64_t q = 0; q < n; ++q) {
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t best_idx = 0;
        for (std::uint32_t c : candidates) {
            const double d = dist(static_cast<std::uint32_t>(q), c);
            if (d < best) {
                best = d;
                best_idx = c;
            }
        }
        out[static_cast<std::size_t>(q)] = {best_idx, best};
    }
    return out;
}

/// k nearest candidates per query, excluding the candidate equal to the
/// query id when `exclude_self` (the self-match convention for in-table
/// neighbor searches). Candidates are the row ids [0, n_candidates).
template <typename Dist>
std::vector<std::vector<std::uint32_t>> batch_knn_serial(std::size_t n_queries,
                                                         std::size_t n_candidates, std::size_t k,
                                                         bool exclude_self, const Dist& dist) {
    std::vector<std::vector<std::uint32_t>> out(n_queries);
    std::vector<double> d(n_candidates);
    for (std::size_t q = 0; q < n_queries; ++q) {
        for (std::size_t c = 0; c < n_candidates; ++c) {
            d[c] = (exclude_self && c == q) ? std::numeric_limits<double>::infinity()
                                            : dist(static_cast<std::uint32_t>(q),
                                                   static_cast<std::uint32_t>(c));
        }
        auto picks = k_smallest(d, k);
        out[q].assign(picks.begin(), picks.end());
    }
    return out;
}

template <typename Dist>
std::vector<std::vector<std::uint32_t>> batch_knn(std::size_t n_queries, std::size_t n_candidates,
                                                  std::size_t k, bool exclude_self,
                                                  const Dist& dist) {
    std::vector<std::vector<std::uint32_t>> out(n_queries);
    const auto n = static_cast<std::int64_t>(n_queries);
#pragma omp parallel for schedule(static)
    for (std::int64_t q = 0; q < n; ++q) {
        std::vector<double> d(n_candidates);
        for (std::size_t c = 0; c < n_candidates; ++c) {
            d[c] = (exclude_self && c == static_cast<std::size_t>(q))
                       ? std::numeric_limits<double>::infinity()
                       : dist(static_cast<std::uint32_t>(q), static_cast<std::uint32_t>(c));
        }
        auto picks = k_smallest(d, k);
        out[static_cast<std::size_t>(q)].assign(picks.begin(), picks.end());
    }
    return out;
}

}  // namespace synthweave::kernels
