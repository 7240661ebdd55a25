#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "synthweave/dataset.hpp"

namespace synthweave::knn {

struct KnnSynthParams {
    double p = 1.0;             ///< Minkowski coefficient, [0.1, 2.0]
    std::size_t k = 5;          ///< neighborhood size, [5, 22]
    std::size_t iterations = 6; ///< surprisal stabilization rounds (l)

    void validate() const;
};

/// Distance between Laplace distributions centered at x and y with common
/// scale b: |x-y| + 1/2 * exp(-|x-y|/b) * (3b + |x-y|). At b = 0 this is
/// plain |x-y|; note the self-distance is 1.5*b, not 0.
double lk_distance(double x, double y, double b);

/// Mean absolute deviation about the mean.
double mean_abs_deviation(const std::vector<double>& values);

struct NominalStats {
    std::vector<std::size_t> counts;  ///< per category id
    std::int32_t mode = -1;           ///< most frequent id (ties: smallest)
    double mode_frequency = 0.0;      ///< empirical frequency of the mode
};

/// Fitted synthesizer state: per-numeric-column surprisal b (the Laplace
/// scale driving both the LK distance and the global sampler), per
/// categorical column the value histogram, plus the retained training
/// table and its normalization ranges.
struct KnnSynthModel {
    KnnSynthParams params;
    std::shared_ptr<const Table> training;
    Scaler scaler;
    std::vector<double> surprisal;                       ///< b per column (0 for categorical)
    std::vector<std::vector<double>> surprisal_history;  ///< per column: b before/after each round
    std::vector<double> column_mean;                     ///< per numeric column
    std::vector<NominalStats> nominal;                   ///< per categorical column
};

/// Runs `iterations` rounds: the first finds every row's k nearest
/// neighbors under the plain Minkowski distance with b = 1/k, each round
/// then re-estimates b per numeric column as the column's mean absolute
/// deviation and refreshes the neighborhoods under the LK-augmented
/// distance. The rng parameter is part of the interface but unused: with
/// the column-wide deviation estimate the procedure is deterministic.
KnnSynthModel fit(const Table& t, const KnnSynthParams& params, std::uint64_t seed);

/// Generates rows feature-by-feature in a per-row random order. The first
/// feature samples the global distribution (histogram or Laplace(mean, b));
/// every later feature samples the value distribution of the k training
/// rows nearest to the partially built row, measuring distance over the
/// already-synthesized features only. Numeric draws are clamped to the
/// observed column range. Rows are generated in parallel from per-row
/// sub-seeds.
Table synthesize(const KnnSynthModel& model, std::size_t n_out, std::uint64_t seed);

}  // namespace synthweave::knn
