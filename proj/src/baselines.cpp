#define EIGEN_DONT_PARALLELIZE
#include "synthweave/baselines.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "synthweave/normal.hpp"

namespace synthweave::baselines {

namespace {
constexpr std::uint64_t kNoiseStream = 0x6d6172675f666974ULL;
constexpr std::uint64_t kRowStream = 0x626173655f726f77ULL;
}  // namespace

// --- marginal ---------------------------------------------------------------

MarginalModel fit_marginal(const Table& t, double epsilon, std::size_t bins, std::uint64_t seed,
                           bool add_noise) {
    if (t.n_rows() == 0) throw std::invalid_argument("fit_marginal: empty table");
    if (!(epsilon > 0.0)) throw std::invalid_argument("fit_marginal: epsilon must be > 0");
    if (bins < 1) throw std::invalid_argument("fit_marginal: bins must be >= 1");

    MarginalModel model;
    model.epsilon = epsilon;
    model.bins = bins;
    model.n_train = t.n_rows();
    model.noise_scale = 1.0 / (static_cast<double>(t.n_rows()) * epsilon);
    model.prototype = t.empty_like();
    model.columns.resize(t.n_cols());

    const Scaler scaler = fit_scaler(t);
    Rng rng(mix_seed({seed, kNoiseStream}));
    for (std::size_t c = 0; c < t.n_cols(); ++c) {
        auto& col = model.columns[c];
        std::vector<double> counts;
        if (t.schema().columns[c].kind == ColumnKind::Categorical) {
            counts.assign(t.categories(c).size(), 0.0);
            for (const auto& row : t.rows())
                if (row[c].is_category()) counts[static_cast<std::size_t>(row[c].cat())] += 1.0;
        } else {
            const Scaler::Range& r = scaler.range(c);
            counts.assign(bins, 0.0);
            col.bin_edges.resize(bins + 1);
            const double width = (r.max - r.min) / static_cast<double>(bins);
            for (std::size_t b = 0; b <= bins; ++b)
                col.bin_edges[b] = r.min + width * static_cast<double>(b);
            col.bin_edges[bins] = r.max;
            for (const auto& row : t.rows()) {
                if (!row[c].is_number()) continue;
                std::size_t b = 0;
                if (width > 0.0)
                    b = std::min(bins - 1, static_cast<std::size_t>(
                                               std::floor((row[c].num() - r.min) / width)));
                counts[b] += 1.0;
            }
        }

        const double observed = std::accumulate(counts.begin(), counts.end(), 0.0);
        col.probabilities.resize(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i) {
            double p = observed > 0.0 ? counts[i] / observed : 0.0;
            if (add_noise) p += rng.next_laplace(0.0, model.noise_scale);
            col.probabilities[i] = std::max(p, 0.0);
        }
        const double sum =
            std::accumulate(col.probabilities.begin(), col.probabilities.end(), 0.0);
        if (sum > 0.0) {
            for (double& p : col.probabilities) p /= sum;
        } else if (observed > 0.0) {
            // noise wiped out every entry; fall back to uniform over the support
            for (double& p : col.probabilities)
                p = 1.0 / static_cast<double>(col.probabilities.size());
        }
    }
    return model;
}

namespace {

std::size_t sample_distribution(const std::vector<double>& probs, Rng& rng) {
    const double u = rng.next_double();
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) return i;
    }
    return probs.size() - 1;
}

}  // namespace

Table synthesize_marginal(const MarginalModel& model, std::size_t n_out, std::uint64_t seed) {
    Table out = model.prototype.empty_like();
    const std::size_t cols = model.columns.size();
    for (std::size_t r = 0; r < n_out; ++r) {
        Rng rng(mix_seed({seed, kRowStream, static_cast<std::uint64_t>(r)}));
        Row row(cols);
        for (std::size_t c = 0; c < cols; ++c) {
            const auto& col = model.columns[c];
            const double total =
                std::accumulate(col.probabilities.begin(), col.probabilities.end(), 0.0);
            if (total <= 0.0) {
                row[c] = Cell::missing();  // column had no observed values
                continue;
            }
            const std::size_t pick = sample_distribution(col.probabilities, rng);
            if (col.bin_edges.empty()) {
                row[c] = Cell::category(static_cast<std::int32_t>(pick));
            } else {
                const double lo = col.bin_edges[pick];
                const double hi = col.bin_edges[pick + 1];
                row[c] = Cell::number(lo + rng.next_double() * (hi - lo));
            }
        }
        out.add_row(std::move(row));
    }
    return out;
}

// --- copula -------------------------------------------------------------------

namespace {

/// Midpoint-rank quantile levels (avg rank for ties), (r - 0.5) / n.
std::vector<double> midpoint_levels(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> levels(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            levels[order[k]] = (avg_rank - 0.5) / static_cast<double>(n);
        i = j + 1;
    }
    return levels;
}

}  // namespace

CopulaModel fit_copula(const Table& t) {
    if (t.n_rows() < 3) throw std::invalid_argument("fit_copula: need at least 3 rows");
    if (t.n_cols() < 1) throw std::invalid_argument("fit_copula: need at least 1 column");

    const std::size_t n = t.n_rows();
    const std::size_t d = t.n_cols();
    CopulaModel model;
    model.dim = d;
    model.prototype = t.empty_like();
    model.columns.resize(d);

    // transformed data: missing cells sit at the median (z = 0)
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(d));
    for (std::size_t c = 0; c < d; ++c) {
        auto& col = model.columns[c];
        if (t.schema().columns[c].kind == ColumnKind::Numeric) {
            std::vector<double> vals;
            std::vector<std::size_t> rows_of;
            for (std::size_t r = 0; r < n; ++r) {
                if (!t.row(r)[c].is_number()) continue;
                vals.push_back(t.row(r)[c].num());
                rows_of.push_back(r);
            }
            if (!vals.empty()) {
                const auto levels = midpoint_levels(vals);
                for (std::size_t i = 0; i < vals.size(); ++i)
                    z(static_cast<Eigen::Index>(rows_of[i]), static_cast<Eigen::Index>(c)) =
                        normal_quantile(levels[i]);
                col.sorted_values = vals;
                std::sort(col.sorted_values.begin(), col.sorted_values.end());
            }
        } else {
            const std::size_t n_cats = t.categories(c).size();
            std::vector<double> counts(n_cats, 0.0);
            double observed = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                if (!t.row(r)[c].is_category()) continue;
                counts[static_cast<std::size_t>(t.row(r)[c].cat())] += 1.0;
                observed += 1.0;
            }
            col.cumulative.assign(n_cats, 0.0);
            std::vector<double> z_of_cat(n_cats, 0.0);
            double cum = 0.0;
            for (std::size_t id = 0; id < n_cats; ++id) {
                const double p = observed > 0.0 ? counts[id] / observed : 0.0;
                const double mid = cum + p / 2.0;
                cum += p;
                col.cumulative[id] = cum;
                z_of_cat[id] = (p > 0.0) ? normal_quantile(std::clamp(mid, 1e-12, 1.0 - 1e-12))
                                         : 0.0;
            }
            if (n_cats > 0) col.cumulative[n_cats - 1] = 1.0;
            for (std::size_t r = 0; r < n; ++r)
                if (t.row(r)[c].is_category())
                    z(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                        z_of_cat[static_cast<std::size_t>(t.row(r)[c].cat())];
        }
    }

    Eigen::MatrixXd centered = z.rowwise() - z.colwise().mean();
    Eigen::MatrixXd sigma =
        (centered.transpose() * centered) / static_cast<double>(n - 1);

    // PSD repair: clip negative eigenvalues, then rescale to unit diagonal.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    sigma = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    Eigen::VectorXd diag = sigma.diagonal();
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
        if (diag(i) > 0.0) continue;
        // constant column: decouple it
        sigma.row(i).setZero();
        sigma.col(i).setZero();
        sigma(i, i) = 1.0;
        diag(i) = 1.0;
    }
    Eigen::VectorXd inv_sqrt = diag.cwiseSqrt().cwiseInverse();
    sigma = inv_sqrt.asDiagonal() * sigma * inv_sqrt.asDiagonal();
    sigma = ((sigma + sigma.transpose()) / 2.0).eval();

    // sampling factor: Cholesky when strictly PD, spectral factor otherwise
    Eigen::MatrixXd factor;
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() == Eigen::Success) {
        factor = llt.matrixL();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(sigma);
        factor = es2.eigenvectors() *
                 es2.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }

    model.sigma.assign(d * d, 0.0);
    model.factor.assign(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            model.sigma[i * d + j] = sigma(static_cast<Eigen::Index>(i),
                                           static_cast<Eigen::Index>(j));
            model.factor[i * d + j] = factor(static_cast<Eigen::Index>(i),
                                             static_cast<Eigen::Index>(j));
        }
    return model;
}

namespace {

double interpolated_quantile(const std::vector<double>& sorted, double u) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    // sample i sits at quantile level (i + 0.5) / n
    const double pos = u * static_cast<double>(n) - 0.5;
    if (pos <= 0.0) return sorted.front();
    if (pos >= static_cast<double>(n - 1)) return sorted.back();
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - std::floor(pos);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

Table synthesize_copula(const CopulaModel& model, std::size_t n_out, std::uint64_t seed) {
    if (model.dim == 0) throw std::invalid_argument("synthesize_copula: model not fitted");
    Table out = model.prototype.empty_like();
    const std::size_t d = model.dim;
    std::vector<double> g(d), zrow(d);
    for (std::size_t r = 0; r < n_out; ++r) {
        Rng rng(mix_seed({seed, kRowStream, static_cast<std::uint64_t>(r)}));
        for (std::size_t j = 0; j < d; ++j) g[j] = normal_quantile(rng.next_open_double());
        for (std::size_t i = 0; i < d; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < d; ++j) acc += model.factor[i * d + j] * g[j];
            zrow[i] = acc;
        }
        Row row(d);
        for (std::size_t c = 0; c < d; ++c) {
            const double u = normal_cdf(zrow[c]);
            const auto& col = model.columns[c];
            if (!col.sorted_values.empty()) {
                row[c] = Cell::number(interpolated_quantile(col.sorted_values, u));
            } else if (!col.cumulative.empty()) {
                const auto it =
                    std::lower_bound(col.cumulative.begin(), col.cumulative.end(), u);
                const auto id = std::min<std::size_t>(
                    static_cast<std::size_t>(it - col.cumulative.begin()),
                    col.cumulative.size() - 1);
                row[c] = Cell::category(static_cast<std::int32_t>(id));
            } else {
                row[c] = Cell::missing();
            }
        }
        out.add_row(std::move(row));
    }
    return out;
}

}  // namespace synthweave::baselines
