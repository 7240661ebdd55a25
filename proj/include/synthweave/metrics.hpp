#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "synthweave/dataset.hpp"
#include "synthweave/tree_learner.hpp"

namespace synthweave::metrics {

/// The 14 descriptive measurements. Numeric columns fill everything;
/// categorical columns get entropy, uniqueness, and the mode token only,
/// with the rest absent.
struct StatVector {
    std::optional<double> mean, mode, median, p25, p75, min, max;
    std::optional<double> entropy, kurtosis, mad, std_dev, skew, variance;
    std::optional<double> uniqueness;
    std::optional<std::string> mode_category;  ///< mode for categorical columns
};

struct MetricSet {
    std::optional<double> accuracy, precision, recall, mcc;  // classification
    std::optional<double> rmse, r2, spearman;                // regression
};

struct ModelComparison {
    MetricSet on_synthetic;  ///< learner trained on the synthetic table
    MetricSet on_original;   ///< same learner trained on the original slice
};

/// Nearest-neighbor distance ratio, geometric mean over synthetic rows.
/// Per synthetic row: d = distance to the nearest original row; d_min =
/// the smallest pairwise distance within the group of that original row
/// and its k nearest original neighbors (floored at 1e-12). A verbatim
/// copy therefore scores 0, and zeros propagate to a 0 total; the 0.001
/// substitution happens only in the radar aggregation. Distances use the
/// normalized Minkowski metric with p = 2, ranges fitted on the original.
double privacy_preservation(const Table& original, const Table& synthetic, std::size_t k = 5);

/// Descriptive statistics of one column, missing cells skipped.
/// Conventions: quantiles interpolate linearly between order statistics;
/// variance/std/skew/kurtosis are population moments, kurtosis is excess;
/// a constant column has skew = kurtosis = 0; entropy is Shannon entropy
/// (natural log) of the empirical value distribution; uniqueness is
/// distinct / total; mode ties resolve to the smallest value.
StatVector describe_column(const Table& t, std::size_t col);

/// Symmetric mean absolute percentage error over paired score lists,
/// in [0, 2]; a pair of two zeros contributes 0.
double smape(const std::vector<double>& s_syn, const std::vector<double>& s_ori);

/// SMAPE over the measurements present in both vectors (the categorical
/// mode token is not a number and never participates).
double smape_over_stats(const StatVector& syn, const StatVector& ori);

/// Mean per-column SMAPE between the tables' descriptive statistics.
/// Smaller is better; identical tables score 0.
double statistical_similarity(const Table& original, const Table& synthetic);

/// Jensen-Shannon divergence as the plain sum KL(P||M) + KL(Q||M) with
/// natural logs, range [0, 2 ln 2]. `halved` switches to the conventional
/// half-weighted form for cross-tool comparison.
double js_divergence(const std::vector<double>& p, const std::vector<double>& q,
                     bool halved = false);

/// Mean per-column Jensen-Shannon divergence between estimated marginals:
/// numeric columns via k-NN density estimates on a shared `grid`-point
/// lattice spanning both samples (k = max(5, ceil(sqrt(n))) when `k` is 0),
/// categorical columns via normalized value counts over the union of
/// categories.
double marginal_similarity(const Table& original, const Table& synthetic, std::size_t k = 0,
                           std::size_t grid = 100);

/// Binary tasks use the positive-class confusion matrix (positive = the
/// largest label); multi-class uses macro precision/recall and the
/// R_k multi-class MCC. Zero denominators yield 0.
MetricSet classification_metrics(const std::vector<std::int32_t>& y_true,
                                 const std::vector<std::int32_t>& y_pred);

/// RMSE, R^2 and the rank (Spearman) correlation with average ranks on
/// ties. A constant y_true leaves r2/spearman unset. `rank_correlation`
/// = false computes the plain Pearson moment formula on raw values
/// instead of on ranks.
MetricSet regression_metrics(const std::vector<double>& y_true,
                             const std::vector<double>& y_pred, bool rank_correlation = true);

/// Splits the original 80/20 by `seed`, trains the CART learner once on
/// the synthetic table's own 80% slice and once on the original training
/// slice, and evaluates both on the original test slice.
ModelComparison model_comparison(const Table& original, const Table& synthetic,
                                 std::uint64_t seed, const TreeParams& params = {});

}  // namespace synthweave::metrics
