#include "synthweave/knn_synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "synthweave/kernels.hpp"

namespace synthweave::knn {

namespace {
constexpr std::uint64_t kRowStream = 0x6b6e6e5f726f77ULL;
constexpr double kMinLaplaceScale = 1e-9;  // floor for degenerate neighborhoods
}  // namespace

void KnnSynthParams::validate() const {
    if (!(p >= 0.1 && p <= 2.0))
        throw std::invalid_argument("knn: p must lie in [0.1, 2.0]");
    if (k < 5 || k > 22) throw std::invalid_argument("knn: k must lie in [5, 22]");
    if (iterations == 0) throw std::invalid_argument("knn: iterations must be positive");
}

double lk_distance(double x, double y, double b) {
    if (b < 0.0) throw std::invalid_argument("lk_distance: b must be >= 0");
    const double gap = std::fabs(x - y);
    if (b == 0.0) return gap;
    return gap + 0.5 * std::exp(-gap / b) * (3.0 * b + gap);
}

double mean_abs_deviation(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                        static_cast<double>(values.size());
    double acc = 0.0;
    for (double v : values) acc += std::fabs(v - mean);
    return acc / static_cast<double>(values.size());
}

namespace {

/// Minkowski combination of per-feature deltas, optionally averaged over
/// the feature subset so partial-row distances stay comparable.
struct MetricContext {
    const Table* table;
    const Scaler* scaler;
    const std::vector<double>* surprisal;  // per column, raw units
    double p;
    bool use_lk;

    double delta(std::size_t col, const Cell& x, const Cell& y) const {
        if (x.is_missing() || y.is_missing())
            return (x.is_missing() && y.is_missing()) ? 0.0 : 1.0;
        if (table->schema().columns[col].kind == ColumnKind::Categorical)
            return x.cat() == y.cat() ? 0.0 : 1.0;
        const double xn = scaler->normalized_value(col, x.num());
        const double yn = scaler->normalized_value(col, y.num());
        if (!use_lk) return std::fabs(xn - yn);
        // the surprisal is estimated in raw units; rescale it to the
        // normalized axis the distance operates on
        const auto& r = scaler->range(col);
        const double b_norm = r.constant ? 0.0 : (*surprisal)[col] / (r.max - r.min);
        return lk_distance(xn, yn, b_norm);
    }

    double combine(double acc, std::size_t n_features) const {
        if (n_features == 0) return 0.0;
        return std::pow(acc / static_cast<double>(n_features), 1.0 / p);
    }

    double row_to_row(const Row& a, const Row& b) const {
        double acc = 0.0;
        const std::size_t cols = table->n_cols();
        for (std::size_t c = 0; c < cols; ++c) acc += std::pow(delta(c, a[c], b[c]), p);
        return combine(acc, cols);
    }

    double partial(const Row& partial_row, const std::vector<std::size_t>& features,
                   const Row& train_row) const {
        double acc = 0.0;
        for (std::size_t c : features)
            acc += std::pow(delta(c, partial_row[c], train_row[c]), p);
        return combine(acc, features.size());
    }
};

std::vector<double> numeric_column(const Table& t, std::size_t col) {
    std::vector<double> out;
    out.reserve(t.n_rows());
    for (const auto& row : t.rows())
        if (row[col].is_number()) out.push_back(row[col].num());
    return out;
}

std::int32_t sample_histogram(const std::vector<std::size_t>& counts, Rng& rng) {
    const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    std::uint64_t pick = rng.next_below(total);
    for (std::size_t id = 0; id < counts.size(); ++id) {
        if (pick < counts[id]) return static_cast<std::int32_t>(id);
        pick -= counts[id];
    }
    return static_cast<std::int32_t>(counts.size() - 1);
}

}  // namespace

KnnSynthModel fit(const Table& t, const KnnSynthParams& params, std::uint64_t seed) {
    params.validate();
    if (t.n_rows() < params.k + 1)
        throw std::invalid_argument("knn::fit: need at least k+1 rows");
    (void)seed;  // reserved; the fit is deterministic

    KnnSynthModel model;
    model.params = params;
    model.training = std::make_shared<Table>(t);
    model.scaler = fit_scaler(t);

    const std::size_t cols = t.n_cols();
    model.surprisal.assign(cols, 0.0);
    model.surprisal_history.assign(cols, {});
    model.column_mean.assign(cols, 0.0);
    model.nominal.assign(cols, {});

    for (std::size_t c = 0; c < cols; ++c) {
        if (t.schema().columns[c].kind == ColumnKind::Numeric) {
            model.surprisal[c] = 1.0 / static_cast<double>(params.k);
            model.surprisal_history[c].push_back(model.surprisal[c]);
            const auto vals = numeric_column(t, c);
            if (!vals.empty())
                model.column_mean[c] = std::accumulate(vals.begin(), vals.end(), 0.0) /
                                       static_cast<double>(vals.size());
        } else {
            auto& stats = model.nominal[c];
            stats.counts.assign(t.categories(c).size(), 0);
            std::size_t observed = 0;
            for (const auto& row : t.rows()) {
                if (!row[c].is_category()) continue;
                ++stats.counts[static_cast<std::size_t>(row[c].cat())];
                ++observed;
            }
            for (std::size_t id = 0; id < stats.counts.size(); ++id) {
                if (stats.mode < 0 ||
                    stats.counts[id] > stats.counts[static_cast<std::size_t>(stats.mode)])
                    stats.mode = static_cast<std::int32_t>(id);
            }
            if (observed > 0 && stats.mode >= 0)
                stats.mode_frequency =
                    static_cast<double>(stats.counts[static_cast<std::size_t>(stats.mode)]) /
                    static_cast<double>(observed);
        }
    }

    const std::size_t n = t.n_rows();
    for (std::size_t iter = 1; iter <= params.iterations; ++iter) {
        MetricContext metric{&t, &model.scaler, &model.surprisal, params.p, iter > 1};
        auto dist = [&](std::uint32_t a, std::uint32_t b) {
            return metric.row_to_row(t.row(a), t.row(b));
        };
        // neighborhoods refresh under the current metric each round
        auto neighbors = kernels::batch_knn(n, n, params.k, /*exclude_self=*/true, dist);
        (void)neighbors;

        for (std::size_t c = 0; c < cols; ++c) {
            if (t.schema().columns[c].kind != ColumnKind::Numeric) continue;
            model.surprisal[c] = mean_abs_deviation(numeric_column(t, c));
            model.surprisal_history[c].push_back(model.surprisal[c]);
        }
    }
    return model;
}

Table synthesize(const KnnSynthModel& model, std::size_t n_out, std::uint64_t seed) {
    if (!model.training) throw std::invalid_argument("knn::synthesize: model not fitted");
    const Table& train = *model.training;
    Table out = train.empty_like();
    if (n_out == 0) return out;

    const std::size_t cols = train.n_cols();
    const std::size_t n = train.n_rows();
    MetricContext metric{&train, &model.scaler, &model.surprisal, model.params.p, true};

    std::vector<Row> rows(n_out);
    const auto total = static_cast<std::int64_t>(n_out);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t ri = 0; ri < total; ++ri) {
        Rng rng(mix_seed({seed, kRowStream, static_cast<std::uint64_t>(ri)}));

        std::vector<std::size_t> order(cols);
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = cols - 1; i > 0; --i)
            std::swap(order[i], order[rng.next_index(i + 1)]);

        Row row(cols);
        std::vector<std::size_t> synthesized;
        for (std::size_t step = 0; step < cols; ++step) {
            const std::size_t c = order[step];
            const bool numeric = train.schema().columns[c].kind == ColumnKind::Numeric;

            if (step == 0) {
                if (numeric) {
                    const auto& r = model.scaler.range(c);
                    const double v = rng.next_laplace(model.column_mean[c], model.surprisal[c]);
                    row[c] = Cell::number(std::clamp(v, r.min, r.max));
                } else if (const auto& counts = model.nominal[c].counts;
                           std::accumulate(counts.begin(), counts.end(), std::size_t{0}) > 0) {
                    row[c] = Cell::category(sample_histogram(counts, rng));
                } else {
                    row[c] = Cell::missing();
                }
                synthesized.push_back(c);
                continue;
            }

            std::vector<double> d(n);
            for (std::size_t tr = 0; tr < n; ++tr)
                d[tr] = metric.partial(row, synthesized, train.row(tr));
            const auto picks = kernels::k_smallest(d, model.params.k);

            if (numeric) {
                std::vector<double> vals;
                vals.reserve(picks.size());
                for (std::size_t idx : picks)
                    if (train.row(idx)[c].is_number()) vals.push_back(train.row(idx)[c].num());
                const auto& r = model.scaler.range(c);
                if (vals.empty()) {
                    const double v = rng.next_laplace(model.column_mean[c], model.surprisal[c]);
                    row[c] = Cell::number(std::clamp(v, r.min, r.max));
                } else {
                    const double mu = std::accumulate(vals.begin(), vals.end(), 0.0) /
                                      static_cast<double>(vals.size());
                    const double scale = std::max(mean_abs_deviation(vals), kMinLaplaceScale);
                    row[c] = Cell::number(std::clamp(rng.next_laplace(mu, scale), r.min, r.max));
                }
            } else {
                std::vector<std::size_t> counts(train.categories(c).size(), 0);
                std::size_t observed = 0;
                for (std::size_t idx : picks) {
                    if (!train.row(idx)[c].is_category()) continue;
                    ++counts[static_cast<std::size_t>(train.row(idx)[c].cat())];
                    ++observed;
                }
                if (observed > 0) {
                    row[c] = Cell::category(sample_histogram(counts, rng));
                } else if (const auto& global = model.nominal[c].counts;
                           std::accumulate(global.begin(), global.end(), std::size_t{0}) > 0) {
                    row[c] = Cell::category(sample_histogram(global, rng));
                } else {
                    row[c] = Cell::missing();
                }
            }
            synthesized.push_back(c);
        }
        rows[static_cast<std::size_t>(ri)] = std::move(row);
    }

    for (auto& r : rows) out.add_row(std::move(r));
    return out;
}

}  // namespace synthweave::knn
