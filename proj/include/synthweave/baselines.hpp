#pragma once

#include <cstdint>
#include <vector>

#include "synthweave/dataset.hpp"

namespace synthweave::baselines {

// --- Independent marginals with Laplace noise -------------------------------

struct MarginalColumn {
    std::vector<double> probabilities;  ///< per category id, or per bin for numerics
    std::vector<double> bin_edges;      ///< bins+1 edges; empty for categoricals
};

struct MarginalModel {
    double epsilon = 0.1;
    std::size_t bins = 20;
    double noise_scale = 0.0;  ///< 1 / (n * epsilon)
    std::size_t n_train = 0;
    std::vector<MarginalColumn> columns;
    Table prototype;  ///< empty table carrying schema and dictionaries
};

constexpr double kDefaultEpsilon = 0.1;

/// Per-column frequency estimation (numerics binned into `bins` equal-width
/// bins) with i.i.d. Laplace(1/(n*epsilon)) noise on each probability,
/// negatives clamped to zero and the column renormalized. `add_noise`
/// is a test hook for the noiseless estimator.
MarginalModel fit_marginal(const Table& t, double epsilon, std::size_t bins, std::uint64_t seed,
                           bool add_noise = true);

/// Each cell drawn independently from its column's noisy distribution;
/// numeric draws are uniform within the sampled bin.
Table synthesize_marginal(const MarginalModel& model, std::size_t n_out, std::uint64_t seed);

// --- Gaussian copula ---------------------------------------------------------

struct CopulaColumn {
    std::vector<double> sorted_values;  ///< numeric: ascending sample for quantile lookup
    std::vector<double> cumulative;     ///< categorical: P(id <= i) ladder
};

struct CopulaModel {
    std::size_t dim = 0;
    std::vector<double> sigma;   ///< row-major d*d correlation matrix (PSD, unit diagonal)
    std::vector<double> factor;  ///< row-major d*d, factor * factor^T == sigma
    std::vector<CopulaColumn> columns;
    Table prototype;

    double sigma_at(std::size_t i, std::size_t j) const { return sigma[i * dim + j]; }
};

/// Maps every column through its midpoint-rank empirical CDF and the
/// standard normal quantile, then captures the covariance of the
/// transformed data, repaired to the nearest PSD matrix (eigenvalue
/// clipping) and rescaled to unit diagonal. Requires >= 3 rows.
CopulaModel fit_copula(const Table& t);

/// Draws multivariate normal vectors from the stored factor and maps each
/// coordinate through the normal CDF and the column's inverse empirical
/// CDF (interpolated quantile for numerics, ladder lookup for categoricals).
Table synthesize_copula(const CopulaModel& model, std::size_t n_out, std::uint64_t seed);

}  // namespace synthweave::baselines
