#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "synthweave/metrics.hpp"
#include "synthweave/rrp.hpp"
#include "test_support.hpp"

using namespace synthweave;
using testsupport::numeric_column_table;
using testsupport::random_table;

namespace {

Table int_valued_table(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Schema schema;
    for (std::size_t c = 0; c < cols; ++c)
        schema.columns.push_back({"f" + std::to_string(c), ColumnKind::Numeric});
    Table t(schema, std::vector<std::vector<std::string>>(cols));
    Rng rng(seed);
    for (std::size_t r = 0; r < rows; ++r) {
        Row row(cols);
        for (std::size_t c = 0; c < cols; ++c)
            row[c] = Cell::number(static_cast<double>(rng.next_index(101)));
        t.add_row(std::move(row));
    }
    return t;
}

Table affine_numeric(const Table& t, double a, double b) {
    Table out = t.empty_like();
    for (const auto& row : t.rows()) {
        Row r = row;
        for (std::size_t c = 0; c < r.size(); ++c)
            if (r[c].is_number()) r[c] = Cell::number(a * r[c].num() + b);
        out.add_row(std::move(r));
    }
    return out;
}

/// Two-blob linearly separable classification set: class u near the
/// origin, class v far away.
Table separable_classes(std::size_t per_class, std::uint64_t seed) {
    Schema schema;
    schema.columns = {{"x", ColumnKind::Numeric},
                      {"y", ColumnKind::Numeric},
                      {"label", ColumnKind::Categorical}};
    schema.target = "label";
    schema.task = TaskKind::Classification;
    Table t(schema, {{}, {}, {"u", "v"}});
    Rng rng(seed);
    for (std::size_t i = 0; i < per_class; ++i) {
        t.add_row({Cell::number(rng.next_double()), Cell::number(rng.next_double()),
                   Cell::category(0)});
        t.add_row({Cell::number(10.0 + rng.next_double()),
                   Cell::number(10.0 + rng.next_double()), Cell::category(1)});
    }
    return t;
}

}  // namespace

// --- privacy ------------------------------------------------------------------

TEST_CASE("privacy of a verbatim copy is zero") {
    const Table t = random_table(40, 3, 1, 3);
    CHECK(metrics::privacy_preservation(t, t, 5) == 0.0);
}

TEST_CASE("privacy hand-computed 1-d case") {
    const Table original = numeric_column_table({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    const Table synthetic = numeric_column_table({20.0});
    CHECK(metrics::privacy_preservation(original, synthetic, 3) ==
          doctest::Approx(11.0).epsilon(1e-9));
    CHECK_THROWS_AS(metrics::privacy_preservation(original, synthetic, 10),
                    std::invalid_argument);
}

TEST_CASE("privacy at or above 1 for points outside the data envelope") {
    const Table original = int_valued_table(60, 3, 5);
    Table far = original.empty_like();
    for (int i = 0; i < 10; ++i)
        far.add_row({Cell::number(1000.0 + i), Cell::number(1000.0), Cell::number(1000.0)});
    CHECK(metrics::privacy_preservation(original, far, 5) >= 1.0);
}

TEST_CASE("privacy is exactly invariant under a common affine rescale") {
    // integer-valued data keeps the affine map exact in floating point
    const Table original = int_valued_table(50, 3, 9);
    const Table synthetic = int_valued_table(25, 3, 10);
    const double base = metrics::privacy_preservation(original, synthetic, 4);
    const double scaled = metrics::privacy_preservation(affine_numeric(original, 4.0, 3.0),
                                                        affine_numeric(synthetic, 4.0, 3.0), 4);
    CHECK(base == scaled);
}

// --- descriptive statistics -------------------------------------------------------

TEST_CASE("describe_column closed-form values") {
    const Table t = numeric_column_table({1, 2, 2, 3});
    const auto s = metrics::describe_column(t, 0);
    CHECK(*s.mean == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(*s.mode == 2.0);
    CHECK(*s.median == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(*s.uniqueness == doctest::Approx(0.75).epsilon(1e-12));

    const Table q = numeric_column_table({1, 2, 3, 4});
    const auto sq = metrics::describe_column(q, 0);
    CHECK(*sq.p25 == doctest::Approx(1.75).epsilon(1e-12));
    CHECK(*sq.p75 == doctest::Approx(3.25).epsilon(1e-12));

    const Table c = numeric_column_table({7, 7, 7});
    const auto sc = metrics::describe_column(c, 0);
    CHECK(*sc.entropy == 0.0);
    CHECK(*sc.variance == 0.0);
    CHECK(*sc.skew == 0.0);
    CHECK(*sc.kurtosis == 0.0);
}

TEST_CASE("describe_column is order independent") {
    std::vector<double> values{5, 1, 4, 4, 2, 9, 0, 3};
    const Table fwd = numeric_column_table(values);
    std::reverse(values.begin(), values.end());
    const Table rev = numeric_column_table(values);
    const auto a = metrics::describe_column(fwd, 0);
    const auto b = metrics::describe_column(rev, 0);
    CHECK(a.mean == b.mean);
    CHECK(a.mode == b.mode);
    CHECK(a.median == b.median);
    CHECK(a.p25 == b.p25);
    CHECK(a.p75 == b.p75);
    CHECK(a.variance == b.variance);
    CHECK(a.skew == b.skew);
    CHECK(a.kurtosis == b.kurtosis);
    CHECK(a.entropy == b.entropy);
    CHECK(a.uniqueness == b.uniqueness);
}

TEST_CASE("describe_column on categorical columns fills only the discrete fields") {
    Schema schema;
    schema.columns = {{"c", ColumnKind::Categorical}};
    const Table t = make_table(schema, {{"a"}, {"b"}, {"b"}});
    const auto s = metrics::describe_column(t, 0);
    CHECK(*s.mode_category == "b");
    CHECK(*s.uniqueness == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(!s.mean.has_value());
    CHECK(!s.variance.has_value());
    CHECK(*s.entropy ==
          doctest::Approx(-(1.0 / 3) * std::log(1.0 / 3) - (2.0 / 3) * std::log(2.0 / 3))
              .epsilon(1e-12));
}

// --- smape ------------------------------------------------------------------------

TEST_CASE("smape closed-form values and range") {
    CHECK(metrics::smape({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(metrics::smape({3}, {1}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(metrics::smape({0}, {0}) == 0.0);
    CHECK_THROWS_AS(metrics::smape({1}, {1, 2}), std::invalid_argument);

    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> a(5), b(5);
        for (int j = 0; j < 5; ++j) {
            a[j] = rng.next_double() * 10 - 5;
            b[j] = rng.next_double() * 10 - 5;
        }
        const double ab = metrics::smape(a, b);
        CHECK(ab == metrics::smape(b, a));
        CHECK(ab >= 0.0);
        CHECK(ab <= 2.0);
    }
}

TEST_CASE("statistical similarity: identity is 0, doubled statistics give 2/3") {
    const Table t = random_table(60, 3, 1, 44);
    CHECK(metrics::statistical_similarity(t, t) == 0.0);

    metrics::StatVector base;
    base.mean = 1.0;
    base.mode = 2.0;
    base.median = 3.0;
    base.p25 = 0.5;
    base.p75 = 4.0;
    base.min = 0.25;
    base.max = 8.0;
    base.entropy = 1.5;
    base.kurtosis = 0.5;
    base.mad = 0.75;
    base.std_dev = 1.25;
    base.skew = 0.4;
    base.variance = 1.5625;
    base.uniqueness = 0.9;
    metrics::StatVector doubled = base;
    for (auto* f : {&doubled.mean, &doubled.mode, &doubled.median, &doubled.p25, &doubled.p75,
                    &doubled.min, &doubled.max, &doubled.entropy, &doubled.kurtosis,
                    &doubled.mad, &doubled.std_dev, &doubled.skew, &doubled.variance,
                    &doubled.uniqueness})
        *f = **f * 2.0;
    CHECK(metrics::smape_over_stats(doubled, base) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("statistical similarity rejects schema mismatches") {
    const Table a = random_table(20, 2, 0, 1);
    const Table b = random_table(20, 1, 1, 1);
    CHECK_THROWS_AS(metrics::statistical_similarity(a, b), std::invalid_argument);
}

// --- divergence -----------------------------------------------------------------------

TEST_CASE("js_divergence closed-form values") {
    CHECK(metrics::js_divergence({0.5, 0.5}, {0.5, 0.5}) == 0.0);
    CHECK(metrics::js_divergence({1, 0}, {0, 1}) ==
          doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
    CHECK(metrics::js_divergence({1, 0}, {0, 1}, /*halved=*/true) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(metrics::js_divergence({1}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(metrics::js_divergence({0.7, 0.7}, {0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("js_divergence symmetry, range, and separation") {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> p(4), q(4);
        double sp = 0, sq = 0;
        for (int j = 0; j < 4; ++j) {
            p[j] = rng.next_open_double();
            q[j] = rng.next_open_double();
            sp += p[j];
            sq += q[j];
        }
        for (int j = 0; j < 4; ++j) {
            p[j] /= sp;
            q[j] /= sq;
        }
        const double d = metrics::js_divergence(p, q);
        CHECK(d == metrics::js_divergence(q, p));
        CHECK(d >= 0.0);
        CHECK(d <= 2.0 * std::log(2.0) + 1e-12);
        if (p != q) CHECK(d > 0.0);
    }
}

TEST_CASE("marginal similarity: identity, disjoint categories, large-sample agreement") {
    const Table t = random_table(80, 2, 1, 5);
    CHECK(metrics::marginal_similarity(t, t) == doctest::Approx(0.0).epsilon(1e-12));

    Schema schema;
    schema.columns = {{"c", ColumnKind::Categorical}};
    const Table all_a = make_table(schema, {{"a"}, {"a"}, {"a"}});
    const Table all_b = make_table(schema, {{"b"}, {"b"}, {"b"}});
    CHECK(metrics::marginal_similarity(all_a, all_b) ==
          doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));

    Schema num;
    num.columns = {{"x", ColumnKind::Numeric}};
    Table u1(num, {{}});
    Table u2(num, {{}});
    Rng rng(17);
    for (int i = 0; i < 5000; ++i) u1.add_row({Cell::number(rng.next_double())});
    for (int i = 0; i < 5000; ++i) u2.add_row({Cell::number(rng.next_double())});
    CHECK(metrics::marginal_similarity(u1, u2) <= 0.05);
}

// --- model metrics -----------------------------------------------------------------------

TEST_CASE("classification metrics closed-form cases") {
    {  // perfect prediction
        std::vector<std::int32_t> y(10, 1);
        for (int i = 0; i < 5; ++i) y[i] = 0;
        const auto m = metrics::classification_metrics(y, y);
        CHECK(*m.accuracy == 1.0);
        CHECK(*m.precision == 1.0);
        CHECK(*m.recall == 1.0);
        CHECK(*m.mcc == 1.0);
    }
    {  // all-positive predictions on balanced labels
        std::vector<std::int32_t> y_true{1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
        std::vector<std::int32_t> y_pred(10, 1);
        const auto m = metrics::classification_metrics(y_true, y_pred);
        CHECK(*m.accuracy == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(*m.precision == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(*m.recall == 1.0);
        CHECK(*m.mcc == 0.0);
    }
    {  // TP=3 TN=4 FP=1 FN=2
        std::vector<std::int32_t> y_true{1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
        std::vector<std::int32_t> y_pred{1, 1, 1, 0, 0, 0, 0, 0, 0, 1};
        const auto m = metrics::classification_metrics(y_true, y_pred);
        CHECK(*m.accuracy == doctest::Approx(0.7).epsilon(1e-12));
        CHECK(*m.mcc == doctest::Approx(10.0 / std::sqrt(600.0)).epsilon(1e-9));
    }
}

TEST_CASE("classification accuracy agrees with direct label comparison") {
    Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 20 + rng.next_index(200);
        const std::int32_t n_classes = 2 + static_cast<std::int32_t>(rng.next_index(4));
        std::vector<std::int32_t> y_true(n), y_pred(n);
        std::size_t agree = 0;
        for (std::size_t i = 0; i < n; ++i) {
            y_true[i] = static_cast<std::int32_t>(rng.next_index(n_classes));
            y_pred[i] = static_cast<std::int32_t>(rng.next_index(n_classes));
            if (y_true[i] == y_pred[i]) ++agree;
        }
        const auto m = metrics::classification_metrics(y_true, y_pred);
        CHECK(*m.accuracy ==
              doctest::Approx(static_cast<double>(agree) / n).epsilon(1e-12));
        CHECK(*m.mcc >= -1.0);
        CHECK(*m.mcc <= 1.0);
    }
}

TEST_CASE("regression metrics closed-form cases") {
    const std::vector<double> y{1, 2, 3, 4, 5};
    {
        const auto m = metrics::regression_metrics(y, y);
        CHECK(*m.rmse == 0.0);
        CHECK(*m.r2 == 1.0);
        CHECK(*m.spearman == 1.0);
    }
    {  // predicting the mean zeroes out R^2
        const std::vector<double> mean_pred(5, 3.0);
        const auto m = metrics::regression_metrics(y, mean_pred);
        CHECK(*m.r2 == doctest::Approx(0.0).epsilon(1e-12));
    }
    {  // monotone transform keeps rank correlation at 1
        const std::vector<double> cubed{1, 8, 27, 64, 125};
        CHECK(*metrics::regression_metrics(y, cubed).spearman ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    {  // constant truth leaves correlation and R^2 undefined
        const auto m = metrics::regression_metrics({2, 2, 2}, {1, 2, 3});
        CHECK(!m.r2.has_value());
        CHECK(!m.spearman.has_value());
        CHECK(*m.rmse > 0.0);
    }
}

TEST_CASE("regression r2 never exceeds 1 and rmse vanishes only on equality") {
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> y(10), p(10);
        for (int i = 0; i < 10; ++i) {
            y[i] = rng.next_double() * 10;
            p[i] = rng.next_double() * 10;
        }
        const auto m = metrics::regression_metrics(y, p);
        CHECK(*m.r2 <= 1.0);
        CHECK((*m.rmse == 0.0) == (y == p));
    }
}

TEST_CASE("spearman is invariant under monotone transforms of either side") {
    Rng rng(14);
    std::vector<double> y(30), p(30);
    for (int i = 0; i < 30; ++i) {
        y[i] = rng.next_double() * 10 - 5;
        p[i] = rng.next_double() * 10 - 5;
    }
    const double base = *metrics::regression_metrics(y, p).spearman;
    std::vector<double> y_t(30), p_t(30);
    for (int i = 0; i < 30; ++i) {
        y_t[i] = std::exp(y[i] / 3.0);
        p_t[i] = p[i] * p[i] * p[i];
    }
    CHECK(*metrics::regression_metrics(y_t, p).spearman == doctest::Approx(base).epsilon(1e-12));
    CHECK(*metrics::regression_metrics(y, p_t).spearman == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("model comparison on identical tables gives identical metric sets") {
    const Table t = separable_classes(60, 5);
    const auto result = metrics::model_comparison(t, t, 17);
    CHECK(result.on_synthetic.accuracy == result.on_original.accuracy);
    CHECK(result.on_synthetic.precision == result.on_original.precision);
    CHECK(result.on_synthetic.recall == result.on_original.recall);
    CHECK(result.on_synthetic.mcc == result.on_original.mcc);
}

TEST_CASE("the tree learner separates linearly separable classes perfectly") {
    const Table t = separable_classes(100, 6);
    const auto result = metrics::model_comparison(t, t, 3);
    CHECK(*result.on_original.accuracy == 1.0);
}

TEST_CASE("synthetic data from the projection generator keeps model utility") {
    const Table t = separable_classes(100, 7);
    const Table synth = rrp::synthesize(t, t.n_rows(), {}, 100);
    const auto result = metrics::model_comparison(t, synth, 3);
    CHECK(*result.on_synthetic.accuracy >= 0.9 * *result.on_original.accuracy);
}

TEST_CASE("model comparison requires a prediction task") {
    const Table t = random_table(30, 2, 1, 2);
    CHECK_THROWS_AS(metrics::model_comparison(t, t, 1), std::invalid_argument);
}
