#include "synthweave/tree_learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace synthweave::metrics {

namespace {

struct SplitChoice {
    bool found = false;
    double score = std::numeric_limits<double>::infinity();  // weighted child impurity
    std::size_t feature = 0;
    bool categorical = false;
    double threshold = 0.0;
    std::int32_t category = -1;
};

double gini_from_counts(const std::vector<std::size_t>& counts, std::size_t total) {
    if (total == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        acc += p * p;
    }
    return 1.0 - acc;
}

}  // namespace

struct TreeBuilder {
    const Table& data;
    std::size_t target;
    TreeParams params;
    bool classifier;
    std::size_t n_classes = 0;

    std::int32_t label(std::size_t row) const { return data.row(row)[target].cat(); }
    double response(std::size_t row) const { return data.row(row)[target].num(); }

    Cell leaf_value(const std::vector<std::size_t>& rows) const {
        if (classifier) {
            std::vector<std::size_t> counts(n_classes, 0);
            for (std::size_t r : rows) ++counts[static_cast<std::size_t>(label(r))];
            std::size_t best = 0;
            for (std::size_t c = 1; c < counts.size(); ++c)
                if (counts[c] > counts[best]) best = c;
            return Cell::category(static_cast<std::int32_t>(best));
        }
        double sum = 0.0;
        for (std::size_t r : rows) sum += response(r);
        return Cell::number(sum / static_cast<double>(rows.size()));
    }

    double node_impurity(const std::vector<std::size_t>& rows) const {
        if (classifier) {
            std::vector<std::size_t> counts(n_classes, 0);
            for (std::size_t r : rows) ++counts[static_cast<std::size_t>(label(r))];
            return gini_from_counts(counts, rows.size()) * static_cast<double>(rows.size());
        }
        double sum = 0.0, sumsq = 0.0;
        for (std::size_t r : rows) {
            const double y = response(r);
            sum += y;
            sumsq += y * y;
        }
        return sumsq - sum * sum / static_cast<double>(rows.size());  // SSE
    }

    // weighted impurity of a two-way partition given aggregate stats
    double partition_score_classification(const std::vector<std::size_t>& left_counts,
                                          std::size_t n_left,
                                          const std::vector<std::size_t>& right_counts,
                                          std::size_t n_right) const {
        return gini_from_counts(left_counts, n_left) * static_cast<double>(n_left) +
               gini_from_counts(right_counts, n_right) * static_cast<double>(n_right);
    }

    static double partition_score_regression(double lsum, double lsq, std::size_t ln,
                                              double rsum, double rsq, std::size_t rn) {
        const double l = lsq - lsum * lsum / static_cast<double>(ln);
        const double r = rsq - rsum * rsum / static_cast<double>(rn);
        return l + r;
    }

    void consider(SplitChoice& best, double score, std::size_t feature, bool categorical,
                  double threshold, std::int32_t category) const {
        // strictly-better keeps the first candidate on ties, which makes
        // the scan order the tie-break
        if (score < best.score - 1e-12)
            best = {true, score, feature, categorical, threshold, category};
    }

    SplitChoice best_numeric_split(const std::vector<std::size_t>& rows, std::size_t f) const {
        SplitChoice best;
        std::vector<std::size_t> present;
        std::vector<std::size_t> absent;
        for (std::size_t r : rows)
            (data.row(r)[f].is_number() ? present : absent).push_back(r);
        if (present.size() < 2) return best;
        std::sort(present.begin(), present.end(), [&](std::size_t a, std::size_t b) {
            const double va = data.row(a)[f].num();
            const double vb = data.row(b)[f].num();
            if (va != vb) return va < vb;
            return a < b;
        });

        const std::size_t n = rows.size();
        if (classifier) {
            std::vector<std::size_t> left(n_classes, 0), right(n_classes, 0);
            for (std::size_t r : rows) ++right[static_cast<std::size_t>(label(r))];
            std::size_t n_left = 0;
            for (std::size_t i = 0; i + 1 < present.size(); ++i) {
                const auto cls = static_cast<std::size_t>(label(present[i]));
                ++left[cls];
                --right[cls];
                ++n_left;
                const double v = data.row(present[i])[f].num();
                const double nxt = data.row(present[i + 1])[f].num();
                if (v == nxt) continue;
                if (n_left < params.min_leaf || n - n_left < params.min_leaf) continue;
                consider(best,
                         partition_score_classification(left, n_left, right, n - n_left), f,
                         false, (v + nxt) / 2.0, -1);
            }
        } else {
            double rsum = 0.0, rsq = 0.0;
            for (std::size_t r : rows) {
                const double y = response(r);
                rsum += y;
                rsq += y * y;
            }
            double lsum = 0.0, lsq = 0.0;
            std::size_t n_left = 0;
            for (std::size_t i = 0; i + 1 < present.size(); ++i) {
                const double y = response(present[i]);
                lsum += y;
                lsq += y * y;
                rsum -= y;
                rsq -= y * y;
                ++n_left;
                const double v = data.row(present[i])[f].num();
                const double nxt = data.row(present[i + 1])[f].num();
                if (v == nxt) continue;
                if (n_left < params.min_leaf || n - n_left < params.min_leaf) continue;
                consider(best,
                         partition_score_regression(lsum, lsq, n_left, rsum, rsq, n - n_left),
                         f, false, (v + nxt) / 2.0, -1);
            }
        }
        return best;
    }

    SplitChoice best_categorical_split(const std::vector<std::size_t>& rows, std::size_t f) const {
        SplitChoice best;
        const std::size_t n_cats = data.categories(f).size();
        if (n_cats < 2) return best;
        const std::size_t n = rows.size();

        if (classifier) {
            // counts[cat][class]
            std::vector<std::vector<std::size_t>> counts(n_cats,
                                                         std::vector<std::size_t>(n_classes, 0));
            std::vector<std::size_t> cat_total(n_cats, 0);
            std::vector<std::size_t> all(n_classes, 0);
            for (std::size_t r : rows) {
                const auto cls = static_cast<std::size_t>(label(r));
                ++all[cls];
                if (data.row(r)[f].is_category()) {
                    const auto id = static_cast<std::size_t>(data.row(r)[f].cat());
                    ++counts[id][cls];
                    ++cat_total[id];
                }
            }
            for (std::size_t id = 0; id < n_cats; ++id) {
                const std::size_t n_left = cat_total[id];
                if (n_left < params.min_leaf || n - n_left < params.min_leaf) continue;
                std::vector<std::size_t> right(all);
                for (std::size_t c = 0; c < n_classes; ++c) right[c] -= counts[id][c];
                consider(best,
                         partition_score_classification(counts[id], n_left, right, n - n_left),
                         f, true, 0.0, static_cast<std::int32_t>(id));
            }
        } else {
            std::vector<double> sum(n_cats, 0.0), sq(n_cats, 0.0);
            std::vector<std::size_t> cnt(n_cats, 0);
            double tot_sum = 0.0, tot_sq = 0.0;
            for (std::size_t r : rows) {
                const double y = response(r);
                tot_sum += y;
                tot_sq += y * y;
                if (data.row(r)[f].is_category()) {
                    const auto id = static_cast<std::size_t>(data.row(r)[f].cat());
                    sum[id] += y;
                    sq[id] += y * y;
                    ++cnt[id];
                }
            }
            for (std::size_t id = 0; id < n_cats; ++id) {
                const std::size_t n_left = cnt[id];
                if (n_left < params.min_leaf || n - n_left < params.min_leaf) continue;
                consider(best,
                         partition_score_regression(sum[id], sq[id], n_left, tot_sum - sum[id],
                                                    tot_sq - sq[id], n - n_left),
                         f, true, 0.0, static_cast<std::int32_t>(id));
            }
        }
        return best;
    }

    std::unique_ptr<DecisionTree::Node> build(std::vector<std::size_t> rows, std::size_t depth) {
        auto node = std::make_unique<DecisionTree::Node>();
        node->value = leaf_value(rows);
        if (depth >= params.max_depth || rows.size() < 2 * params.min_leaf) return node;
        if (node_impurity(rows) <= 1e-12) return node;

        SplitChoice best;
        for (std::size_t f = 0; f < data.n_cols(); ++f) {
            if (f == target) continue;
            const SplitChoice cand = data.schema().columns[f].kind == ColumnKind::Numeric
                                         ? best_numeric_split(rows, f)
                                         : best_categorical_split(rows, f);
            if (cand.found && cand.score < best.score - 1e-12) best = cand;
        }
        if (!best.found) return node;

        std::vector<std::size_t> left, right;
        for (std::size_t r : rows) {
            const Cell& cell = data.row(r)[best.feature];
            bool go_left;
            if (best.categorical)
                go_left = cell.is_category() && cell.cat() == best.category;
            else
                go_left = cell.is_number() && cell.num() <= best.threshold;
            (go_left ? left : right).push_back(r);
        }
        if (left.empty() || right.empty()) return node;

        node->feature = best.feature;
        node->categorical_split = best.categorical;
        node->threshold = best.threshold;
        node->category = best.category;
        node->left = build(std::move(left), depth + 1);
        node->right = build(std::move(right), depth + 1);
        return node;
    }
};

DecisionTree DecisionTree::train(const Table& data, std::size_t target_col,
                                 const TreeParams& params) {
    if (target_col >= data.n_cols())
        throw std::invalid_argument("DecisionTree: target column out of range");
    const bool classifier =
        data.schema().columns[target_col].kind == ColumnKind::Categorical;

    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < data.n_rows(); ++r)
        if (!data.row(r)[target_col].is_missing()) rows.push_back(r);
    if (rows.empty()) throw std::invalid_argument("DecisionTree: no labeled rows");

    TreeBuilder builder{data, target_col, params, classifier,
                        classifier ? data.categories(target_col).size() : 0};
    DecisionTree tree;
    tree.classifier_ = classifier;
    tree.root_ = builder.build(std::move(rows), 0);
    return tree;
}

Cell DecisionTree::predict(const Row& row) const {
    const Node* node = root_.get();
    while (!node->is_leaf()) {
        const Cell& cell = row[node->feature];
        bool go_left;
        if (node->categorical_split)
            go_left = cell.is_category() && cell.cat() == node->category;
        else
            go_left = cell.is_number() && cell.num() <= node->threshold;
        node = go_left ? node->left.get() : node->right.get();
    }
    return node->value;
}

}  // namespace synthweave::metrics
