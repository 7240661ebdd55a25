#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "synthweave/harness.hpp"
#include "synthweave/rrp.hpp"
#include "test_support.hpp"

using namespace synthweave;
using testsupport::scratch_path;
namespace fs = std::filesystem;

namespace {

/// Classification fixture on disk: two separated blobs + label column.
std::string write_fixture(const std::string& stem, std::uint64_t seed, std::size_t per_class) {
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
        t.add_row({Cell::number(8.0 + rng.next_double()), Cell::number(8.0 + rng.next_double()),
                   Cell::category(1)});
    }
    save_csv(t, scratch_path(stem + ".csv"));
    save_schema_sidecar(schema, scratch_path(stem + ".schema"));
    return scratch_path(stem + ".csv");
}

harness::RunConfig small_config(const std::string& out_subdir) {
    harness::RunConfig cfg;
    cfg.datasets = {{"blob_a", scratch_path("blob_a.csv"), scratch_path("blob_a.schema")},
                    {"blob_b", scratch_path("blob_b.csv"), scratch_path("blob_b.schema")}};
    cfg.algorithms = {{"rrp", {}}, {"marginal", {}}};
    cfg.repeats = 2;
    cfg.master_seed = 11;
    cfg.output_dir = scratch_path(out_subdir);
    return cfg;
}

bool same_metrics(const harness::CellResult& a, const harness::CellResult& b) {
    return a.ok == b.ok && a.privacy == b.privacy && a.statistical == b.statistical &&
           a.marginal == b.marginal &&
           (a.model.has_value() == b.model.has_value()) &&
           (!a.model || (a.model->on_synthetic.accuracy == b.model->on_synthetic.accuracy &&
                         a.model->on_synthetic.mcc == b.model->on_synthetic.mcc));
}

}  // namespace

TEST_CASE("aggregate_scores applies the axis normalization rules") {
    {
        harness::AxisInputs in;
        in.privacy = {1.48, 2.0};  // clamped to 1 before the geometric mean
        CHECK(*harness::aggregate_scores(in).privacy == doctest::Approx(1.0).epsilon(1e-12));
    }
    {
        harness::AxisInputs in;
        in.statistical = {0.13};
        CHECK(*harness::aggregate_scores(in).statistical ==
              doctest::Approx(0.87).epsilon(1e-12));
    }
    {
        harness::AxisInputs in;
        in.model["mcc"] = {-0.05};  // negatives collapse to the 0.001 floor
        CHECK(*harness::aggregate_scores(in).model == doctest::Approx(0.001).epsilon(1e-12));
    }
    {
        harness::AxisInputs in;
        in.privacy = {0.0, 1.0};  // zero contributes as 0.001
        CHECK(*harness::aggregate_scores(in).privacy ==
              doctest::Approx(std::sqrt(0.001)).epsilon(1e-9));
       }
    {
        harness::AxisInputs in;  // empty axes stay absent
        const auto r = harness::aggregate_scores(in);
        CHECK(!r.privacy.has_value());
        CHECK(!r.model.has_value());
    }
}

TEST_CASE("radar axes are monotone in their inputs") {
    harness::AxisInputs base;
    base.privacy = {0.4, 0.9};
    base.statistical = {0.3, 0.2};
    base.marginal = {0.1, 0.5};
    base.model["accuracy"] = {0.7, 0.6};
    base.model["rmse"] = {1.2, 0.8};
    base.scaled_runtime = {0.5, 0.25};
    const auto before = harness::aggregate_scores(base);

    auto improved = base;
    improved.privacy[0] += 0.2;
    improved.statistical[0] -= 0.1;
    improved.marginal[1] -= 0.2;
    improved.model["accuracy"][1] += 0.2;
    improved.model["rmse"][0] -= 0.5;
    improved.scaled_runtime[0] -= 0.3;
    const auto after = harness::aggregate_scores(improved);

    CHECK(*after.privacy >= *before.privacy);
    CHECK(*after.statistical >= *before.statistical);
    CHECK(*after.marginal >= *before.marginal);
    CHECK(*after.model >= *before.model);
    CHECK(*after.scalability >= *before.scalability);
}

TEST_CASE("generate rejects unknown algorithms and parameters") {
    const Table t = testsupport::random_table(30, 2, 0, 1);
    CHECK_THROWS_AS(harness::generate(t, "gan", {}, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(harness::generate(t, "rrp", {{"threshold", 5.0}}, 10, 1),
                    std::invalid_argument);
    CHECK(harness::generate(t, "rrp", {{"t", 6.0}}, 10, 1).n_rows() == 10);
}

TEST_CASE("run_benchmark produces the full deterministic grid") {
    write_fixture("blob_a", 1, 40);
    write_fixture("blob_b", 2, 30);
    const auto cfg = small_config("run1");
    const auto report = harness::run_benchmark(cfg);

    CHECK(report.cells.size() == 2 * 2 * 2);
    CHECK(report.all_ok());
    CHECK(report.dataset_rows[0] == 80);
    for (const auto& cell : report.cells) {
        CHECK(cell.privacy.has_value());
        CHECK(cell.statistical.has_value());
        CHECK(cell.marginal.has_value());
        CHECK(cell.model.has_value());
        CHECK(cell.generation_seconds >= 0.0);
    }

    // repeat indices get distinct seeds, so repeats differ
    CHECK(report.cell(0, 0, 0).seed != report.cell(0, 0, 1).seed);

    const auto again = harness::run_benchmark(cfg);
    for (std::size_t i = 0; i < report.cells.size(); ++i)
        CHECK(same_metrics(report.cells[i], again.cells[i]));

    // worker count must not change any metric value
    auto cfg4 = cfg;
    cfg4.workers = 4;
    const auto parallel = harness::run_benchmark(cfg4);
    for (std::size_t i = 0; i < report.cells.size(); ++i)
        CHECK(same_metrics(report.cells[i], parallel.cells[i]));

    // single-cell grid sanity
    auto cfg1 = cfg;
    cfg1.datasets = {cfg.datasets[0]};
    cfg1.algorithms = {cfg.algorithms[0]};
    cfg1.repeats = 1;
    CHECK(harness::run_benchmark(cfg1).cells.size() == 1);
}

TEST_CASE("a failing dataset is recorded without touching other cells") {
    write_fixture("blob_a", 1, 40);
    write_fixture("blob_b", 2, 30);
    const auto clean = harness::run_benchmark(small_config("run_iso1"));

    auto broken = small_config("run_iso2");
    broken.datasets.insert(broken.datasets.begin() + 1,
                           {"ghost", scratch_path("missing.csv"), ""});
    const auto with_failure = harness::run_benchmark(broken);

    CHECK(!with_failure.all_ok());
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t r = 0; r < 2; ++r) {
            CHECK(!with_failure.cell(1, a, r).ok);
            const bool mentions_cause =
                with_failure.cell(1, a, r).error.find("missing.csv") != std::string::npos;
            CHECK(mentions_cause);
            // surviving datasets keep their exact values (seeds follow indices,
            // so this compares the matching grid positions)
            CHECK(same_metrics(with_failure.cell(0, a, r), clean.cell(0, a, r)));
        }
}

TEST_CASE("emit_report writes the documented files") {
    write_fixture("blob_a", 1, 40);
    write_fixture("blob_b", 2, 30);
    auto cfg = small_config("emit");
    cfg.datasets = {cfg.datasets[0]};
    cfg.algorithms = {cfg.algorithms[0]};
    cfg.repeats = 1;
    const auto report = harness::run_benchmark(cfg);
    harness::emit_report(report, cfg.output_dir);

    // runtime.csv: header plus exactly one data row for the single cell
    std::ifstream rt(fs::path(cfg.output_dir) / "runtime.csv");
    std::string line;
    std::size_t lines = 0;
    while (std::getline(rt, line))
        if (!line.empty()) ++lines;
    CHECK(lines == 2);

    // the single algorithm holds rank 1 in every table
    std::ifstream table(fs::path(cfg.output_dir) / "tables" / "privacy.csv");
    std::string header, row;
    REQUIRE(std::getline(table, header));
    REQUIRE(std::getline(table, row));
    CHECK(header.find("blob_a_rank") != std::string::npos);
    CHECK(row.find("rank=1") != std::string::npos);

    const auto loaded = harness::load_report((fs::path(cfg.output_dir) / "report.json").string());
    CHECK(loaded.cells.size() == report.cells.size());
    CHECK(loaded.cell(0, 0, 0).privacy == report.cell(0, 0, 0).privacy);
    CHECK(loaded.cell(0, 0, 0).seed == report.cell(0, 0, 0).seed);
    CHECK(loaded.radar.at("rrp").privacy == report.radar.at("rrp").privacy);
}

TEST_CASE("emit_report handles an empty report") {
    harness::EvaluationReport empty;
    const std::string dir = scratch_path("empty_report");
    harness::emit_report(empty, dir);
    std::ifstream in(fs::path(dir) / "report.json");
    REQUIRE(in.good());
    const auto doc = nlohmann::json::parse(in);
    CHECK(doc.at("cells").is_array());
    CHECK(doc.at("cells").empty());
}

TEST_CASE("generation time grows with the workload") {
    auto workload_seconds = [](std::size_t n) {
        Schema schema;
        schema.columns = {{"a", ColumnKind::Numeric}, {"b", ColumnKind::Numeric}};
        Table t(schema, {{}, {}});
        Rng rng(n);
        for (std::size_t i = 0; i < n; ++i)
            t.add_row({Cell::number(rng.next_double()), Cell::number(rng.next_double())});
        std::vector<double> times;
        for (int rep = 0; rep < 5; ++rep) {
            const auto t0 = std::chrono::steady_clock::now();
            rrp::synthesize(t, n, {}, 3);
            const auto t1 = std::chrono::steady_clock::now();
            times.push_back(std::chrono::duration<double>(t1 - t0).count());
        }
        std::sort(times.begin(), times.end());
        return times[times.size() / 2];
    };
    CHECK(workload_seconds(40000) >= workload_seconds(20000));
}

TEST_CASE("run config parsing") {
    const std::string good = scratch_path("good_config.json");
    {
        std::ofstream out(good);
        out << R"({
  "master_seed": 9,
  "repeats": 3,
  "synthetic_size": "match",
  "datasets": [{"name": "a", "csv": "a.csv", "schema": "a.schema"}],
  "algorithms": [{"id": "rrp", "params": {"t": 8}}, {"id": "copula"}]
})";
    }
    const auto cfg = harness::load_run_config(good);
    CHECK(cfg.master_seed == 9);
    CHECK(cfg.repeats == 3);
    CHECK(!cfg.synthetic_size.has_value());
    CHECK(cfg.algorithms[0].params.at("t") == 8.0);
    // relative paths resolve against the config directory
    CHECK(fs::path(cfg.datasets[0].csv_path).parent_path() == fs::path(good).parent_path());

    const std::string bad = scratch_path("bad_config.json");
    {
        std::ofstream out(bad);
        out << R"({"datasets": [], "algorithms": [], "reppeats": 1})";
    }
    CHECK_THROWS(harness::load_run_config(bad));

    const std::string bad_algo = scratch_path("bad_algo.json");
    {
        std::ofstream out(bad_algo);
        out << R"({
  "datasets": [{"name": "a", "csv": "a.csv"}],
  "algorithms": [{"id": "diffusion"}]
})";
    }
    CHECK_THROWS(harness::load_run_config(bad_algo));
}
