#include "synthweave/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "synthweave/kernels.hpp"

namespace synthweave::metrics {

namespace {
constexpr double kDminFloor = 1e-12;

std::vector<double> numeric_values(const Table& t, std::size_t col) {
    std::vector<double> out;
    for (const auto& row : t.rows())
        if (row[col].is_number()) out.push_back(row[col].num());
    return out;
}
}  // namespace

// --- privacy -----------------------------------------------------------------

double privacy_preservation(const Table& original, const Table& synthetic, std::size_t k) {
    if (k == 0) throw std::invalid_argument("privacy_preservation: k must be positive");
    if (original.n_rows() < k + 1)
        throw std::invalid_argument("privacy_preservation: need more than k original rows");
    if (synthetic.n_rows() == 0)
        throw std::invalid_argument("privacy_preservation: synthetic table is empty");

    const auto [ori, syn] = unify_categories(original, synthetic);
    const Scaler scaler = fit_scaler(ori);
    const Schema& schema = ori.schema();
    constexpr double p = 2.0;

    std::vector<std::uint32_t> candidates(ori.n_rows());
    std::iota(candidates.begin(), candidates.end(), 0u);
    const auto nearest = kernels::batch_nearest(
        syn.n_rows(), candidates, [&](std::uint32_t q, std::uint32_t c) {
            return row_distance(syn.row(q), ori.row(c), schema, scaler, p);
        });

    // d_min per referenced original row: tightest pairwise distance within
    // the row plus its k nearest original neighbors
    std::vector<std::uint32_t> referenced;
    {
        std::vector<bool> seen(ori.n_rows(), false);
        for (const auto& [idx, d] : nearest)
            if (!seen[idx]) {
                seen[idx] = true;
                referenced.push_back(idx);
            }
    }
    auto ori_dist = [&](std::uint32_t a, std::uint32_t b) {
        return row_distance(ori.row(a), ori.row(b), schema, scaler, p);
    };
    std::vector<double> dmin(ori.n_rows(), 0.0);
    const auto n_ref = static_cast<std::int64_t>(referenced.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t ri = 0; ri < n_ref; ++ri) {
        const std::uint32_t center = referenced[static_cast<std::size_t>(ri)];
        std::vector<double> d(ori.n_rows());
        for (std::size_t c = 0; c < ori.n_rows(); ++c)
            d[c] = c == center ? std::numeric_limits<double>::infinity()
                               : ori_dist(center, static_cast<std::uint32_t>(c));
        auto picks = kernels::k_smallest(d, k);
        std::vector<std::uint32_t> group{center};
        group.insert(group.end(), picks.begin(), picks.end());
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < group.size(); ++i)
            for (std::size_t j = i + 1; j < group.size(); ++j)
                best = std::min(best, ori_dist(group[i], group[j]));
        dmin[center] = best;
    }

    // geometric mean; a zero row score collapses the whole product to 0
    double log_sum = 0.0;
    for (const auto& [idx, d] : nearest) {
        const double score = d / std::max(dmin[idx], kDminFloor);
        if (score == 0.0) return 0.0;
        log_sum += std::log(score);
    }
    return std::exp(log_sum / static_cast<double>(nearest.size()));
}

// --- descriptive statistics ----------------------------------------------------

namespace {

double quantile_linear(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double pos = q * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    if (lo + 1 >= n) return sorted[n - 1];
    const double frac = pos - std::floor(pos);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

/// Shannon entropy (natural log) plus distinct count over a sorted sample.
std::pair<double, std::size_t> entropy_and_distinct(const std::vector<double>& sorted) {
    const auto n = static_cast<double>(sorted.size());
    double h = 0.0;
    std::size_t distinct = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const double p = static_cast<double>(j - i + 1) / n;
        h -= p * std::log(p);
        ++distinct;
        i = j + 1;
    }
    return {h, distinct};
}

}  // namespace

StatVector describe_column(const Table& t, std::size_t col) {
    StatVector out;
    const bool numeric = t.schema().columns[col].kind == ColumnKind::Numeric;

    if (!numeric) {
        std::vector<std::size_t> counts(t.categories(col).size(), 0);
        std::size_t total = 0;
        for (const auto& row : t.rows())
            if (row[col].is_category()) {
                ++counts[static_cast<std::size_t>(row[col].cat())];
                ++total;
            }
        if (total == 0) throw std::invalid_argument("describe_column: empty column");
        double h = 0.0;
        std::size_t distinct = 0;
        std::size_t best = 0;
        bool have_best = false;
        for (std::size_t id = 0; id < counts.size(); ++id) {
            if (counts[id] == 0) continue;
            const double p = static_cast<double>(counts[id]) / static_cast<double>(total);
            h -= p * std::log(p);
            ++distinct;
            if (!have_best || counts[id] > counts[best]) {
                best = id;
                have_best = true;
            }
        }
        out.entropy = h;
        out.uniqueness = static_cast<double>(distinct) / static_cast<double>(total);
        out.mode_category = t.category_name(col, static_cast<std::int32_t>(best));
        return out;
    }

    std::vector<double> v = numeric_values(t, col);
    if (v.empty()) throw std::invalid_argument("describe_column: empty column");
    std::sort(v.begin(), v.end());
    const auto n = static_cast<double>(v.size());

    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0, abs_dev = 0.0;
    for (double x : v) {
        const double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
        abs_dev += std::fabs(d);
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    const double sd = std::sqrt(m2);

    out.mean = mean;
    out.median = quantile_linear(v, 0.5);
    out.p25 = quantile_linear(v, 0.25);
    out.p75 = quantile_linear(v, 0.75);
    out.min = v.front();
    out.max = v.back();
    out.variance = m2;
    out.std_dev = sd;
    out.mad = abs_dev / n;
    out.skew = sd > 0.0 ? m3 / (sd * sd * sd) : 0.0;
    out.kurtosis = sd > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;

    // longest run in the sorted sample; first (smallest) value wins ties
    double mode = v[0];
    std::size_t mode_count = 0;
    std::size_t i = 0;
    while (i < v.size()) {
        std::size_t j = i;
        while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
        if (j - i + 1 > mode_count) {
            mode_count = j - i + 1;
            mode = v[i];
        }
        i = j + 1;
    }
    out.mode = mode;

    const auto [h, distinct] = entropy_and_distinct(v);
    out.entropy = h;
    out.uniqueness = static_cast<double>(distinct) / n;
    return out;
}

// --- SMAPE ---------------------------------------------------------------------

double smape(const std::vector<double>& s_syn, const std::vector<double>& s_ori) {
    if (s_syn.size() != s_ori.size() || s_syn.empty())
        throw std::invalid_argument("smape: lists must have equal non-zero length");
    double acc = 0.0;
    for (std::size_t i = 0; i < s_syn.size(); ++i) {
        const double denom = (std::fabs(s_ori[i]) + std::fabs(s_syn[i])) / 2.0;
        if (denom == 0.0) continue;  // both zero
        acc += std::fabs(s_syn[i] - s_ori[i]) / denom;
    }
    return acc / static_cast<double>(s_syn.size());
}

double smape_over_stats(const StatVector& syn, const StatVector& ori) {
    std::vector<double> a, b;
    auto push = [&](const std::optional<double>& x, const std::optional<double>& y) {
        if (x && y) {
            a.push_back(*x);
            b.push_back(*y);
        }
    };
    push(syn.mean, ori.mean);
    push(syn.mode, ori.mode);
    push(syn.median, ori.median);
    push(syn.p25, ori.p25);
    push(syn.p75, ori.p75);
    push(syn.min, ori.min);
    push(syn.max, ori.max);
    push(syn.entropy, ori.entropy);
    push(syn.kurtosis, ori.kurtosis);
    push(syn.mad, ori.mad);
    push(syn.std_dev, ori.std_dev);
    push(syn.skew, ori.skew);
    push(syn.variance, ori.variance);
    push(syn.uniqueness, ori.uniqueness);
    if (a.empty()) return 0.0;
    return smape(a, b);
}

double statistical_similarity(const Table& original, const Table& synthetic) {
    if (original.schema().columns != synthetic.schema().columns)
        throw std::invalid_argument("statistical_similarity: schemas differ");
    const std::size_t cols = original.n_cols();
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c)
        acc += smape_over_stats(describe_column(synthetic, c), describe_column(original, c));
    return acc / static_cast<double>(cols);
}

// --- divergence -----------------------------------------------------------------

double js_divergence(const std::vector<double>& p, const std::vector<double>& q, bool halved) {
    if (p.size() != q.size() || p.empty())
        throw std::invalid_argument("js_divergence: dimension mismatch");
    double sp = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < 0.0 || q[i] < 0.0)
            throw std::invalid_argument("js_divergence: negative probability");
        sp += p[i];
        sq += q[i];
    }
    if (std::fabs(sp - 1.0) > 1e-9 || std::fabs(sq - 1.0) > 1e-9)
        throw std::invalid_argument("js_divergence: inputs must sum to 1");

    auto kl_to_mid = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] == 0.0) continue;
            const double m = (a[i] + b[i]) / 2.0;
            acc += a[i] * std::log(a[i] / m);
        }
        return acc;
    };
    const double d = kl_to_mid(p, q) + kl_to_mid(q, p);
    return halved ? d / 2.0 : d;
}

namespace {

/// Distance from x to its k-th nearest value in a sorted sample.
double kth_nearest_distance(const std::vector<double>& sorted, double x, std::size_t k) {
    const auto n = static_cast<std::ptrdiff_t>(sorted.size());
    auto right = std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
    auto left = right - 1;
    double r = 0.0;
    for (std::size_t step = 0; step < k; ++step) {
        const double dl = left >= 0 ? x - sorted[static_cast<std::size_t>(left)]
                                    : std::numeric_limits<double>::infinity();
        const double dr = right < n ? sorted[static_cast<std::size_t>(right)] - x
                                    : std::numeric_limits<double>::infinity();
        if (dl <= dr) {
            r = dl;
            --left;
        } else {
            r = dr;
            ++right;
        }
    }
    return r;
}

std::vector<double> knn_density_on_grid(const std::vector<double>& values,
                                        const std::vector<double>& grid, std::size_t k) {
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    const std::size_t k_eff = std::min<std::size_t>(std::max<std::size_t>(k, 1), sorted.size());
    const auto n = static_cast<double>(sorted.size());

    std::vector<double> density(grid.size());
    const auto g = static_cast<std::int64_t>(grid.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < g; ++i) {
        const double rk = kth_nearest_distance(sorted, grid[static_cast<std::size_t>(i)], k_eff);
        density[static_cast<std::size_t>(i)] =
            static_cast<double>(k_eff) / (n * 2.0 * std::max(rk, 1e-12));
    }
    const double total = std::accumulate(density.begin(), density.end(), 0.0);
    for (double& d : density) d /= total;
    return density;
}

std::size_t auto_density_k(std::size_t n) {
    return std::max<std::size_t>(5, static_cast<std::size_t>(
                                        std::ceil(std::sqrt(static_cast<double>(n)))));
}

}  // namespace

double marginal_similarity(const Table& original, const Table& synthetic, std::size_t k,
                           std::size_t grid) {
    if (original.schema().columns != synthetic.schema().columns)
        throw std::invalid_argument("marginal_similarity: schemas differ");
    if (original.n_rows() == 0 || synthetic.n_rows() == 0)
        throw std::invalid_argument("marginal_similarity: tables must be non-empty");
    if (grid < 2) throw std::invalid_argument("marginal_similarity: grid must be >= 2");

    const auto [ori, syn] = unify_categories(original, synthetic);
    const std::size_t cols = ori.n_cols();
    double acc = 0.0;
    std::size_t counted = 0;

    for (std::size_t c = 0; c < cols; ++c) {
        if (ori.schema().columns[c].kind == ColumnKind::Categorical) {
            const std::size_t n_cats = ori.categories(c).size();
            if (n_cats == 0) continue;
            auto histogram = [&](const Table& t) {
                std::vector<double> h(n_cats, 0.0);
                double total = 0.0;
                for (const auto& row : t.rows())
                    if (row[c].is_category()) {
                        h[static_cast<std::size_t>(row[c].cat())] += 1.0;
                        total += 1.0;
                    }
                if (total > 0.0)
                    for (double& x : h) x /= total;
                return std::pair{h, total};
            };
            const auto [ho, no] = histogram(ori);
            const auto [hs, ns] = histogram(syn);
            if (no == 0.0 || ns == 0.0) continue;
            acc += js_divergence(ho, hs);
            ++counted;
        } else {
            const auto vo = numeric_values(ori, c);
            const auto vs = numeric_values(syn, c);
            if (vo.empty() || vs.empty()) continue;
            const double lo = std::min(*std::min_element(vo.begin(), vo.end()),
                                       *std::min_element(vs.begin(), vs.end()));
            const double hi = std::max(*std::max_element(vo.begin(), vo.end()),
                                       *std::max_element(vs.begin(), vs.end()));
            if (hi == lo) {
                ++counted;  // identical point masses, divergence 0
                continue;
            }
            std::vector<double> lattice(grid);
            for (std::size_t i = 0; i < grid; ++i)
                lattice[i] =
                    lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid - 1);
            const auto po =
                knn_density_on_grid(vo, lattice, k ? k : auto_density_k(vo.size()));
            const auto ps =
                knn_density_on_grid(vs, lattice, k ? k : auto_density_k(vs.size()));
            acc += js_divergence(po, ps);
            ++counted;
        }
    }
    if (counted == 0) throw std::invalid_argument("marginal_similarity: no measurable columns");
    return acc / static_cast<double>(counted);
}

// --- model metrics ---------------------------------------------------------------

MetricSet classification_metrics(const std::vector<std::int32_t>& y_true,
                                 const std::vector<std::int32_t>& y_pred) {
    if (y_true.size() != y_pred.size() || y_true.empty())
        throw std::invalid_argument("classification_metrics: length mismatch");

    std::vector<std::int32_t> classes(y_true);
    classes.insert(classes.end(), y_pred.begin(), y_pred.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    const std::size_t n_classes = classes.size();
    auto class_index = [&](std::int32_t label) {
        return static_cast<std::size_t>(
            std::lower_bound(classes.begin(), classes.end(), label) - classes.begin());
    };

    const auto n = static_cast<double>(y_true.size());
    std::vector<std::vector<double>> cm(n_classes, std::vector<double>(n_classes, 0.0));
    for (std::size_t i = 0; i < y_true.size(); ++i)
        cm[class_index(y_true[i])][class_index(y_pred[i])] += 1.0;

    MetricSet out;
    double trace = 0.0;
    for (std::size_t i = 0; i < n_classes; ++i) trace += cm[i][i];
    out.accuracy = trace / n;

    auto safe_div = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };

    if (n_classes <= 2) {
        // positive class = largest label
        const std::size_t pos = n_classes - 1;
        const std::size_t neg = n_classes == 2 ? 0 : pos;
        const double tp = cm[pos][pos];
        const double tn = n_classes == 2 ? cm[neg][neg] : 0.0;
        const double fp = n_classes == 2 ? cm[neg][pos] : 0.0;
        const double fn = n_classes == 2 ? cm[pos][neg] : 0.0;
        out.precision = safe_div(tp, tp + fp);
        out.recall = safe_div(tp, tp + fn);
        const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
        out.mcc = denom > 0.0 ? (tn * tp - fn * fp) / std::sqrt(denom) : 0.0;
        return out;
    }

    // macro precision/recall
    double prec = 0.0, rec = 0.0;
    std::vector<double> true_count(n_classes, 0.0), pred_count(n_classes, 0.0);
    for (std::size_t i = 0; i < n_classes; ++i)
        for (std::size_t j = 0; j < n_classes; ++j) {
            true_count[i] += cm[i][j];
            pred_count[j] += cm[i][j];
        }
    for (std::size_t c = 0; c < n_classes; ++c) {
        prec += safe_div(cm[c][c], pred_count[c]);
        rec += safe_div(cm[c][c], true_count[c]);
    }
    out.precision = prec / static_cast<double>(n_classes);
    out.recall = rec / static_cast<double>(n_classes);

    // multi-class MCC (R_k statistic)
    double tp_sum = 0.0;
    for (std::size_t c = 0; c < n_classes; ++c) tp_sum += true_count[c] * pred_count[c];
    double t_sq = 0.0, p_sq = 0.0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        t_sq += true_count[c] * true_count[c];
        p_sq += pred_count[c] * pred_count[c];
    }
    const double denom = std::sqrt((n * n - p_sq) * (n * n - t_sq));
    out.mcc = denom > 0.0 ? (trace * n - tp_sum) / denom : 0.0;
    return out;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const auto n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    if (va == 0.0 || vb == 0.0) return std::nullopt;
    return cov / std::sqrt(va * vb);
}

}  // namespace

MetricSet regression_metrics(const std::vector<double>& y_true, const std::vector<double>& y_pred,
                             bool rank_correlation) {
    if (y_true.size() != y_pred.size() || y_true.size() < 2)
        throw std::invalid_argument("regression_metrics: need equal lengths >= 2");
    const auto n = static_cast<double>(y_true.size());

    MetricSet out;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double e = y_pred[i] - y_true[i];
        ss_res += e * e;
    }
    out.rmse = std::sqrt(ss_res / n);

    const double mean_y = std::accumulate(y_true.begin(), y_true.end(), 0.0) / n;
    double ss_tot = 0.0;
    for (double y : y_true) ss_tot += (y - mean_y) * (y - mean_y);
    if (ss_tot > 0.0) {
        out.r2 = 1.0 - ss_res / ss_tot;
        out.spearman = rank_correlation
                           ? pearson(average_ranks(y_true), average_ranks(y_pred))
                           : pearson(y_true, y_pred);
    }
    return out;
}

ModelComparison model_comparison(const Table& original, const Table& synthetic,
                                 std::uint64_t seed, const TreeParams& params) {
    if (original.schema().columns != synthetic.schema().columns)
        throw std::invalid_argument("model_comparison: schemas differ");
    const Schema& schema = original.schema();
    if (schema.task == TaskKind::None || !schema.target)
        throw std::invalid_argument("model_comparison: schema has no prediction task");

    const auto [ori, syn] = unify_categories(original, synthetic);
    const std::size_t target = *schema.index_of(*schema.target);

    const auto [ori_train, ori_test] = split_train_test(ori, 0.8, seed);
    const auto [syn_train, syn_test] = split_train_test(syn, 0.8, seed);
    (void)syn_test;

    auto evaluate = [&](const Table& train) {
        const DecisionTree tree = DecisionTree::train(train, target, params);
        if (schema.task == TaskKind::Classification) {
            std::vector<std::int32_t> y_true, y_pred;
            for (const auto& row : ori_test.rows()) {
                if (!row[target].is_category()) continue;
                y_true.push_back(row[target].cat());
                y_pred.push_back(tree.predict(row).cat());
            }
            return classification_metrics(y_true, y_pred);
        }
        std::vector<double> y_true, y_pred;
        for (const auto& row : ori_test.rows()) {
            if (!row[target].is_number()) continue;
            y_true.push_back(row[target].num());
            y_pred.push_back(tree.predict(row).num());
        }
        return regression_metrics(y_true, y_pred);
    };

    return {evaluate(syn_train), evaluate(ori_train)};
}

}  // namespace synthweave::metrics
