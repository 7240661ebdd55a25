#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "synthweave/dataset.hpp"
#include "synthweave/metrics.hpp"
#include "synthweave/scott_knott.hpp"

namespace synthweave::harness {

struct DatasetSpec {
    std::string name;
    std::string csv_path;
    std::string schema_path;  ///< optional sidecar; empty = infer schema
};

struct AlgorithmSpec {
    std::string id;                        ///< rrp | knn | marginal | copula
    std::map<std::string, double> params;  ///< algorithm-specific overrides
};

struct MetricParams {
    std::size_t privacy_k = 5;
    std::size_t marginal_k = 0;  ///< 0 = max(5, ceil(sqrt(n)))
    std::size_t marginal_grid = 100;
};

struct RunConfig {
    std::vector<DatasetSpec> datasets;
    std::vector<AlgorithmSpec> algorithms;
    std::size_t repeats = 10;
    std::uint64_t master_seed = 0;
    std::optional<std::size_t> synthetic_size;  ///< nullopt = match original size
    MetricParams metric_params;
    std::size_t workers = 1;  ///< SYNTHWEAVE_WORKERS overrides at run time
    bool save_synthetic = false;
    std::string output_dir = "synthweave_out";

    void validate() const;
};

/// Parses the JSON run configuration; relative dataset paths resolve
/// against the config file's directory.
RunConfig load_run_config(const std::string& path);

struct CellResult {
    std::size_t dataset = 0;
    std::size_t algorithm = 0;
    std::size_t repeat = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double generation_seconds = 0.0;
    std::optional<double> privacy;
    std::optional<double> statistical;
    std::optional<double> marginal;
    std::optional<metrics::ModelComparison> model;
};

struct RankEntry {
    std::string dataset;
    std::string metric;
    std::map<std::string, std::size_t> algorithm_rank;  ///< 1 = best
};

struct RadarScores {
    std::optional<double> privacy;
    std::optional<double> statistical;
    std::optional<double> marginal;
    std::optional<double> model;
    std::optional<double> scalability;
};

struct EvaluationReport {
    std::uint64_t master_seed = 0;
    std::size_t repeats = 0;
    std::vector<std::string> dataset_names;
    std::vector<std::size_t> dataset_rows;
    std::vector<std::string> algorithm_ids;
    std::vector<CellResult> cells;  ///< indexed (dataset*A + algorithm)*R + repeat
    std::vector<RankEntry> ranks;
    std::map<std::string, RadarScores> radar;

    const CellResult& cell(std::size_t d, std::size_t a, std::size_t r) const;
    bool all_ok() const;
};

/// Fits the named generator on `train` and draws `n_out` rows.
/// Unknown parameter keys are rejected.
Table generate(const Table& train, const std::string& algo_id,
               const std::map<std::string, double>& params, std::size_t n_out,
               std::uint64_t seed);

struct PairEvaluation {
    double privacy = 0.0;
    double statistical = 0.0;
    double marginal = 0.0;
    std::optional<metrics::ModelComparison> model;  ///< present when the schema has a task
};

/// All four metric families for one (original, synthetic) pair. The seed
/// fixes the model-comparison train/test split.
PairEvaluation evaluate_pair(const Table& original, const Table& synthetic, std::uint64_t seed,
                             const MetricParams& params = {});

/// Runs the full grid. Per-cell seeds derive from
/// mix_seed(master_seed, cell tag, dataset, algorithm, repeat), so results
/// are identical for any worker count and execution order. Cell failures
/// are recorded in-report and do not abort the run. Generation (fit +
/// sampling) is timed; evaluation is not.
EvaluationReport run_benchmark(const RunConfig& config);

/// Per-dataset inputs for one algorithm's radar axes. Vectors may be
/// empty (axis omitted) but must be index-aligned across algorithms.
struct AxisInputs {
    std::vector<double> privacy;
    std::vector<double> statistical;
    std::vector<double> marginal;
    std::map<std::string, std::vector<double>> model;  ///< metric -> per-dataset values
    std::vector<double> scaled_runtime;                ///< min-max scaled within dataset
};

/// RQ-style [0,1] aggregation: privacy clamps at 1 then geometric-means;
/// similarity axes geometric-mean (1 - score); the model axis
/// geometric-means each metric across datasets and then across metrics,
/// with RMSE mapped to 1/(1+RMSE) so every factor is higher-is-better;
/// scalability geometric-means (1 - scaled runtime). Every geometric-mean
/// factor is floored at 0.001, which also implements the zero/negative
/// substitution rule.
RadarScores aggregate_scores(const AxisInputs& inputs);

/// Writes report.json, tables/<metric>.csv (algorithms x datasets with
/// rank marks), runtime.csv, and radar.csv into `directory`.
void emit_report(const EvaluationReport& report, const std::string& directory);

std::string report_to_json(const EvaluationReport& report);
EvaluationReport load_report(const std::string& path);

/// Metric ids a report can rank, with their polarity.
std::vector<std::pair<std::string, bool>> rank_metrics();  ///< (metric, bigger_is_better)

}  // namespace synthweave::harness
