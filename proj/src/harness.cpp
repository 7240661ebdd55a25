#include "synthweave/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "synthweave/baselines.hpp"
#include "synthweave/knn_synth.hpp"
#include "synthweave/rrp.hpp"

namespace synthweave::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {
constexpr std::uint64_t kCellStream = 0x63656c6c5f696478ULL;

double param_or(const std::map<std::string, double>& params, const std::string& key,
                double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void require_known_params(const std::map<std::string, double>& params,
                          const std::set<std::string>& known, const std::string& algo) {
    for (const auto& [key, value] : params)
        if (!known.count(key))
            throw std::invalid_argument("generate: unknown parameter '" + key + "' for " + algo);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}
}  // namespace

// --- config ---------------------------------------------------------------------

void RunConfig::validate() const {
    if (datasets.empty()) throw std::invalid_argument("config: no datasets");
    if (algorithms.empty()) throw std::invalid_argument("config: no algorithms");
    if (repeats < 1) throw std::invalid_argument("config: repeats must be >= 1");
    std::set<std::string> names;
    for (const auto& d : datasets) {
        if (d.name.empty()) throw std::invalid_argument("config: dataset without a name");
        if (!names.insert(d.name).second)
            throw std::invalid_argument("config: duplicate dataset name '" + d.name + "'");
    }
    const std::set<std::string> known_algos{"rrp", "knn", "marginal", "copula"};
    for (const auto& a : algorithms)
        if (!known_algos.count(a.id))
            throw std::invalid_argument("config: unknown algorithm id '" + a.id + "'");
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error("config: parse error in '" + path + "': " + e.what());
    }

    const std::set<std::string> known_keys{
        "datasets",   "algorithms",     "repeats",    "master_seed", "synthetic_size",
        "privacy_k",  "marginal_k",     "marginal_grid", "workers",  "save_synthetic",
        "output_dir"};
    for (const auto& [key, value] : doc.items())
        if (!known_keys.count(key))
            throw std::runtime_error("config: unknown key '" + key + "'");

    RunConfig cfg;
    const fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        if (p.empty()) return p;
        fs::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };

    for (const auto& d : doc.at("datasets")) {
        DatasetSpec spec;
        spec.name = d.at("name").get<std::string>();
        spec.csv_path = resolve(d.at("csv").get<std::string>());
        if (d.contains("schema")) spec.schema_path = resolve(d.at("schema").get<std::string>());
        cfg.datasets.push_back(std::move(spec));
    }
    for (const auto& a : doc.at("algorithms")) {
        AlgorithmSpec spec;
        spec.id = a.at("id").get<std::string>();
        if (a.contains("params"))
            for (const auto& [key, value] : a.at("params").items())
                spec.params[key] = value.get<double>();
        cfg.algorithms.push_back(std::move(spec));
    }
    if (doc.contains("repeats")) cfg.repeats = doc.at("repeats").get<std::size_t>();
    if (doc.contains("master_seed")) cfg.master_seed = doc.at("master_seed").get<std::uint64_t>();
    if (doc.contains("synthetic_size")) {
        const auto& v = doc.at("synthetic_size");
        if (v.is_string()) {
            if (v.get<std::string>() != "match")
                throw std::runtime_error("config: synthetic_size must be \"match\" or a count");
        } else {
            cfg.synthetic_size = v.get<std::size_t>();
        }
    }
    if (doc.contains("privacy_k"))
        cfg.metric_params.privacy_k = doc.at("privacy_k").get<std::size_t>();
    if (doc.contains("marginal_k"))
        cfg.metric_params.marginal_k = doc.at("marginal_k").get<std::size_t>();
    if (doc.contains("marginal_grid"))
        cfg.metric_params.marginal_grid = doc.at("marginal_grid").get<std::size_t>();
    if (doc.contains("workers")) cfg.workers = doc.at("workers").get<std::size_t>();
    if (doc.contains("save_synthetic")) cfg.save_synthetic = doc.at("save_synthetic").get<bool>();
    if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();
    cfg.validate();
    return cfg;
}

// --- generation dispatch -----------------------------------------------------------

Table generate(const Table& train, const std::string& algo_id,
               const std::map<std::string, double>& params, std::size_t n_out,
               std::uint64_t seed) {
    if (algo_id == "rrp") {
        require_known_params(params, {"t", "F", "CR", "p"}, algo_id);
        rrp::RrpConfig cfg;
        cfg.leaf_threshold = static_cast<std::size_t>(param_or(params, "t", 12));
        cfg.scale_factor = param_or(params, "F", 0.8);
        cfg.crossover_prob = param_or(params, "CR", 0.9);
        cfg.distance_p = param_or(params, "p", 2.0);
        return rrp::synthesize(train, n_out, cfg, seed);
    }
    if (algo_id == "knn") {
        require_known_params(params, {"p", "k", "l"}, algo_id);
        knn::KnnSynthParams p;
        p.p = param_or(params, "p", 1.0);
        p.k = static_cast<std::size_t>(param_or(params, "k", 5));
        p.iterations = static_cast<std::size_t>(param_or(params, "l", 6));
        const auto model = knn::fit(train, p, seed);
        return knn::synthesize(model, n_out, seed);
    }
    if (algo_id == "marginal") {
        require_known_params(params, {"epsilon", "bins"}, algo_id);
        const double epsilon = param_or(params, "epsilon", baselines::kDefaultEpsilon);
        const auto bins = static_cast<std::size_t>(param_or(params, "bins", 20));
        const auto model = baselines::fit_marginal(train, epsilon, bins, seed);
        return baselines::synthesize_marginal(model, n_out, seed);
    }
    if (algo_id == "copula") {
        require_known_params(params, {}, algo_id);
        const auto model = baselines::fit_copula(train);
        return baselines::synthesize_copula(model, n_out, seed);
    }
    throw std::invalid_argument("generate: unknown algorithm id '" + algo_id + "'");
}

// --- evaluation ----------------------------------------------------------------------

PairEvaluation evaluate_pair(const Table& original, const Table& synthetic, std::uint64_t seed,
                             const MetricParams& params) {
    PairEvaluation out;
    out.privacy = metrics::privacy_preservation(original, synthetic, params.privacy_k);
    out.statistical = metrics::statistical_similarity(original, synthetic);
    out.marginal = metrics::marginal_similarity(original, synthetic, params.marginal_k,
                                                params.marginal_grid);
    if (original.schema().task != TaskKind::None)
        out.model = metrics::model_comparison(original, synthetic, seed);
    return out;
}

// --- benchmark ------------------------------------------------------------------------

const CellResult& EvaluationReport::cell(std::size_t d, std::size_t a, std::size_t r) const {
    return cells[(d * algorithm_ids.size() + a) * repeats + r];
}

bool EvaluationReport::all_ok() const {
    for (const auto& c : cells)
        if (!c.ok) return false;
    return true;
}

namespace {

std::optional<double> metric_value(const CellResult& c, const std::string& metric) {
    if (metric == "privacy") return c.privacy;
    if (metric == "statistical_similarity") return c.statistical;
    if (metric == "marginal_similarity") return c.marginal;
    if (!c.model) return std::nullopt;
    const metrics::MetricSet& s = c.model->on_synthetic;
    if (metric == "accuracy") return s.accuracy;
    if (metric == "precision") return s.precision;
    if (metric == "recall") return s.recall;
    if (metric == "mcc") return s.mcc;
    if (metric == "rmse") return s.rmse;
    if (metric == "r2") return s.r2;
    if (metric == "spearman") return s.spearman;
    return std::nullopt;
}

std::size_t env_workers(std::size_t fallback) {
    const char* raw = std::getenv("SYNTHWEAVE_WORKERS");
    if (!raw) return fallback;
    char* end = nullptr;
    const unsigned long v = std::strtoul(raw, &end, 10);
    if (end == raw || *end != '\0' || v == 0) return fallback;
    return static_cast<std::size_t>(v);
}

}  // namespace

std::vector<std::pair<std::string, bool>> rank_metrics() {
    return {{"privacy", true},
            {"statistical_similarity", false},
            {"marginal_similarity", false},
            {"accuracy", true},
            {"precision", true},
            {"recall", true},
            {"mcc", true},
            {"rmse", false},
            {"r2", true},
            {"spearman", true}};
}

EvaluationReport run_benchmark(const RunConfig& config) {
    config.validate();
    const std::size_t n_datasets = config.datasets.size();
    const std::size_t n_algos = config.algorithms.size();
    const std::size_t repeats = config.repeats;

    EvaluationReport report;
    report.master_seed = config.master_seed;
    report.repeats = repeats;
    for (const auto& d : config.datasets) report.dataset_names.push_back(d.name);
    for (const auto& a : config.algorithms) report.algorithm_ids.push_back(a.id);
    report.dataset_rows.assign(n_datasets, 0);

    // load once up front; a broken dataset fails only its own cells
    std::vector<std::optional<Table>> tables(n_datasets);
    std::vector<std::string> load_errors(n_datasets);
    for (std::size_t d = 0; d < n_datasets; ++d) {
        try {
            std::optional<Schema> hint;
            if (!config.datasets[d].schema_path.empty())
                hint = load_schema_sidecar(config.datasets[d].schema_path);
            tables[d] = load_csv(config.datasets[d].csv_path, hint);
            report.dataset_rows[d] = tables[d]->n_rows();
        } catch (const std::exception& e) {
            load_errors[d] = e.what();
        }
    }

    const fs::path out_dir(config.output_dir);
    if (config.save_synthetic) fs::create_directories(out_dir / "synthetic");

    const std::size_t total = n_datasets * n_algos * repeats;
    report.cells.resize(total);

    auto run_cell = [&](std::size_t index) {
        CellResult cell;
        cell.dataset = index / (n_algos * repeats);
        cell.algorithm = (index / repeats) % n_algos;
        cell.repeat = index % repeats;
        cell.seed = mix_seed({config.master_seed, kCellStream, cell.dataset, cell.algorithm,
                              cell.repeat});
        if (!tables[cell.dataset]) {
            cell.error = "dataset load failed: " + load_errors[cell.dataset];
            return cell;
        }
        try {
            const Table& original = *tables[cell.dataset];
            const std::size_t n_out = config.synthetic_size.value_or(original.n_rows());
            const auto& algo = config.algorithms[cell.algorithm];

            const auto t0 = std::chrono::steady_clock::now();
            const Table synthetic = generate(original, algo.id, algo.params, n_out, cell.seed);
            const auto t1 = std::chrono::steady_clock::now();
            cell.generation_seconds = std::chrono::duration<double>(t1 - t0).count();

            if (config.save_synthetic) {
                const auto file = out_dir / "synthetic" /
                                  (config.datasets[cell.dataset].name + "_" + algo.id + "_r" +
                                   std::to_string(cell.repeat) + ".csv");
                save_csv(synthetic, file.string());
            }

            const auto eval = evaluate_pair(original, synthetic, cell.seed, config.metric_params);
            cell.privacy = eval.privacy;
            cell.statistical = eval.statistical;
            cell.marginal = eval.marginal;
            cell.model = eval.model;
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.ok = false;
            cell.error = e.what();
        }
        return cell;
    };

    const std::size_t workers = std::min(env_workers(config.workers), std::max<std::size_t>(total, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < total; ++i) report.cells[i] = run_cell(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1))
                    report.cells[i] = run_cell(i);
            });
        for (auto& t : pool) t.join();
    }

    // Scott-Knott ranks per (dataset, metric) across algorithms
    for (std::size_t d = 0; d < n_datasets; ++d) {
        for (const auto& [metric, bigger_better] : rank_metrics()) {
            std::vector<stats::ScoreGroup> groups;
            for (std::size_t a = 0; a < n_algos; ++a) {
                stats::ScoreGroup g{report.algorithm_ids[a], {}};
                for (std::size_t r = 0; r < repeats; ++r) {
                    const auto& c = report.cell(d, a, r);
                    if (!c.ok) continue;
                    if (auto v = metric_value(c, metric)) g.scores.push_back(*v);
                }
                if (!g.scores.empty()) groups.push_back(std::move(g));
            }
            if (groups.empty()) continue;
            const auto ranked = stats::scott_knott(groups, bigger_better);
            RankEntry entry{report.dataset_names[d], metric, {}};
            for (std::size_t r = 0; r < ranked.ranks.size(); ++r)
                for (const auto& g : ranked.ranks[r]) entry.algorithm_rank[g.id] = r + 1;
            report.ranks.push_back(std::move(entry));
        }
    }

    // radar axes from per-(dataset, algorithm) means
    struct Mean {
        double sum = 0.0;
        std::size_t n = 0;
        void add(double v) {
            sum += v;
            ++n;
        }
        std::optional<double> value() const {
            if (n == 0) return std::nullopt;
            return sum / static_cast<double>(n);
        }
    };
    auto mean_of = [&](std::size_t d, std::size_t a, const std::string& metric) {
        Mean m;
        for (std::size_t r = 0; r < repeats; ++r) {
            const auto& c = report.cell(d, a, r);
            if (!c.ok) continue;
            if (auto v = metric_value(c, metric)) m.add(*v);
        }
        return m.value();
    };
    auto mean_runtime = [&](std::size_t d, std::size_t a) {
        Mean m;
        for (std::size_t r = 0; r < repeats; ++r) {
            const auto& c = report.cell(d, a, r);
            if (c.ok) m.add(c.generation_seconds);
        }
        return m.value();
    };

    // min-max runtime scaling within each dataset, across algorithms
    std::vector<std::vector<std::optional<double>>> scaled_runtime(
        n_datasets, std::vector<std::optional<double>>(n_algos));
    for (std::size_t d = 0; d < n_datasets; ++d) {
        double lo = 0.0, hi = 0.0;
        bool seen = false;
        std::vector<std::optional<double>> rt(n_algos);
        for (std::size_t a = 0; a < n_algos; ++a) {
            rt[a] = mean_runtime(d, a);
            if (!rt[a]) continue;
            if (!seen) {
                lo = hi = *rt[a];
                seen = true;
            } else {
                lo = std::min(lo, *rt[a]);
                hi = std::max(hi, *rt[a]);
            }
        }
        for (std::size_t a = 0; a < n_algos; ++a) {
            if (!rt[a]) continue;
            scaled_runtime[d][a] = hi > lo ? (*rt[a] - lo) / (hi - lo) : 0.0;
        }
    }

    for (std::size_t a = 0; a < n_algos; ++a) {
        AxisInputs inputs;
        for (std::size_t d = 0; d < n_datasets; ++d) {
            if (auto v = mean_of(d, a, "privacy")) inputs.privacy.push_back(*v);
            if (auto v = mean_of(d, a, "statistical_similarity"))
                inputs.statistical.push_back(*v);
            if (auto v = mean_of(d, a, "marginal_similarity")) inputs.marginal.push_back(*v);
            for (const char* m : {"accuracy", "precision", "recall", "mcc", "rmse", "r2",
                                  "spearman"})
                if (auto v = mean_of(d, a, m)) inputs.model[m].push_back(*v);
            if (scaled_runtime[d][a]) inputs.scaled_runtime.push_back(*scaled_runtime[d][a]);
        }
        report.radar[report.algorithm_ids[a]] = aggregate_scores(inputs);
    }
    return report;
}

// --- radar aggregation -------------------------------------------------------------------

namespace {

/// Geometric mean with every factor floored at 0.001 (the zero/negative
/// substitution). Empty input -> absent axis.
std::optional<double> floored_geomean(const std::vector<double>& values) {
    if (values.empty()) return std::nullopt;
    double log_sum = 0.0;
    for (double v : values) log_sum += std::log(std::max(v, 0.001));
    return std::exp(log_sum / static_cast<double>(values.size()));
}

}  // namespace

RadarScores aggregate_scores(const AxisInputs& inputs) {
    RadarScores out;

    std::vector<double> privacy;
    privacy.reserve(inputs.privacy.size());
    for (double v : inputs.privacy) privacy.push_back(std::min(v, 1.0));
    out.privacy = floored_geomean(privacy);

    auto complement = [](const std::vector<double>& values) {
        std::vector<double> c;
        c.reserve(values.size());
        for (double v : values) c.push_back(1.0 - v);
        return c;
    };
    out.statistical = floored_geomean(complement(inputs.statistical));
    out.marginal = floored_geomean(complement(inputs.marginal));

    std::vector<double> per_metric;
    for (const auto& [metric, values] : inputs.model) {
        if (values.empty()) continue;
        std::vector<double> mapped;
        mapped.reserve(values.size());
        for (double v : values)
            mapped.push_back(metric == "rmse" ? 1.0 / (1.0 + std::max(v, 0.0)) : v);
        if (auto g = floored_geomean(mapped)) per_metric.push_back(*g);
    }
    out.model = floored_geomean(per_metric);

    out.scalability = floored_geomean(complement(inputs.scaled_runtime));
    return out;
}

// --- report emission ------------------------------------------------------------------------

namespace {

json metric_set_to_json(const metrics::MetricSet& s) {
    json j = json::object();
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) j[key] = *v;
    };
    put("accuracy", s.accuracy);
    put("precision", s.precision);
    put("recall", s.recall);
    put("mcc", s.mcc);
    put("rmse", s.rmse);
    put("r2", s.r2);
    put("spearman", s.spearman);
    return j;
}

metrics::MetricSet metric_set_from_json(const json& j) {
    metrics::MetricSet s;
    auto get = [&](const char* key, std::optional<double>& v) {
        if (j.contains(key)) v = j.at(key).get<double>();
    };
    get("accuracy", s.accuracy);
    get("precision", s.precision);
    get("recall", s.recall);
    get("mcc", s.mcc);
    get("rmse", s.rmse);
    get("r2", s.r2);
    get("spearman", s.spearman);
    return s;
}

json radar_to_json(const RadarScores& r) {
    json j = json::object();
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) j[key] = *v;
    };
    put("privacy", r.privacy);
    put("statistical_similarity", r.statistical);
    put("marginal_similarity", r.marginal);
    put("model", r.model);
    put("scalability", r.scalability);
    return j;
}

}  // namespace

std::string report_to_json(const EvaluationReport& report) {
    json doc;
    doc["master_seed"] = report.master_seed;
    doc["repeats"] = report.repeats;
    doc["datasets"] = json::array();
    for (std::size_t d = 0; d < report.dataset_names.size(); ++d)
        doc["datasets"].push_back(
            {{"name", report.dataset_names[d]}, {"rows", report.dataset_rows[d]}});
    doc["algorithms"] = report.algorithm_ids;

    doc["cells"] = json::array();
    for (const auto& c : report.cells) {
        json jc;
        jc["dataset"] = report.dataset_names[c.dataset];
        jc["algorithm"] = report.algorithm_ids[c.algorithm];
        jc["repeat"] = c.repeat;
        jc["seed"] = c.seed;
        jc["ok"] = c.ok;
        if (!c.ok) jc["error"] = c.error;
        jc["generation_seconds"] = c.generation_seconds;
        if (c.privacy) jc["privacy"] = *c.privacy;
        if (c.statistical) jc["statistical_similarity"] = *c.statistical;
        if (c.marginal) jc["marginal_similarity"] = *c.marginal;
        if (c.model)
            jc["model"] = {{"on_synthetic", metric_set_to_json(c.model->on_synthetic)},
                           {"on_original", metric_set_to_json(c.model->on_original)}};
        doc["cells"].push_back(std::move(jc));
    }

    doc["ranks"] = json::array();
    for (const auto& entry : report.ranks) {
        json je;
        je["dataset"] = entry.dataset;
        je["metric"] = entry.metric;
        je["ranks"] = entry.algorithm_rank;
        doc["ranks"].push_back(std::move(je));
    }

    doc["radar"] = json::object();
    for (const auto& [algo, scores] : report.radar) doc["radar"][algo] = radar_to_json(scores);

    return doc.dump(2) + "\n";
}

EvaluationReport load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_report: cannot open '" + path + "'");
    json doc = json::parse(in);

    EvaluationReport report;
    report.master_seed = doc.at("master_seed").get<std::uint64_t>();
    report.repeats = doc.at("repeats").get<std::size_t>();
    for (const auto& d : doc.at("datasets")) {
        report.dataset_names.push_back(d.at("name").get<std::string>());
        report.dataset_rows.push_back(d.at("rows").get<std::size_t>());
    }
    report.algorithm_ids = doc.at("algorithms").get<std::vector<std::string>>();

    auto index_of = [](const std::vector<std::string>& xs, const std::string& x) {
        for (std::size_t i = 0; i < xs.size(); ++i)
            if (xs[i] == x) return i;
        throw std::runtime_error("load_report: unknown id '" + x + "'");
    };

    report.cells.resize(report.dataset_names.size() * report.algorithm_ids.size() *
                        report.repeats);
    for (const auto& jc : doc.at("cells")) {
        CellResult c;
        c.dataset = index_of(report.dataset_names, jc.at("dataset").get<std::string>());
        c.algorithm = index_of(report.algorithm_ids, jc.at("algorithm").get<std::string>());
        c.repeat = jc.at("repeat").get<std::size_t>();
        c.seed = jc.at("seed").get<std::uint64_t>();
        c.ok = jc.at("ok").get<bool>();
        if (jc.contains("error")) c.error = jc.at("error").get<std::string>();
        c.generation_seconds = jc.at("generation_seconds").get<double>();
        if (jc.contains("privacy")) c.privacy = jc.at("privacy").get<double>();
        if (jc.contains("statistical_similarity"))
            c.statistical = jc.at("statistical_similarity").get<double>();
        if (jc.contains("marginal_similarity"))
            c.marginal = jc.at("marginal_similarity").get<double>();
        if (jc.contains("model")) {
            metrics::ModelComparison m;
            m.on_synthetic = metric_set_from_json(jc.at("model").at("on_synthetic"));
            m.on_original = metric_set_from_json(jc.at("model").at("on_original"));
            c.model = m;
        }
        const std::size_t idx =
            (c.dataset * report.algorithm_ids.size() + c.algorithm) * report.repeats + c.repeat;
        report.cells[idx] = std::move(c);
    }

    for (const auto& je : doc.at("ranks")) {
        RankEntry entry;
        entry.dataset = je.at("dataset").get<std::string>();
        entry.metric = je.at("metric").get<std::string>();
        for (const auto& [algo, rank] : je.at("ranks").items())
            entry.algorithm_rank[algo] = rank.get<std::size_t>();
        report.ranks.push_back(std::move(entry));
    }
    for (const auto& [algo, scores] : doc.at("radar").items()) {
        RadarScores r;
        if (scores.contains("privacy")) r.privacy = scores.at("privacy").get<double>();
        if (scores.contains("statistical_similarity"))
            r.statistical = scores.at("statistical_similarity").get<double>();
        if (scores.contains("marginal_similarity"))
            r.marginal = scores.at("marginal_similarity").get<double>();
        if (scores.contains("model")) r.model = scores.at("model").get<double>();
        if (scores.contains("scalability")) r.scalability = scores.at("scalability").get<double>();
        report.radar[algo] = r;
    }
    return report;
}

void emit_report(const EvaluationReport& report, const std::string& directory) {
    const fs::path dir(directory);
    fs::create_directories(dir / "tables");

    {
        std::ofstream out(dir / "report.json", std::ios::binary);
        if (!out) throw std::runtime_error("emit_report: cannot write report.json");
        out << report_to_json(report);
    }

    const std::size_t n_datasets = report.dataset_names.size();
    const std::size_t n_algos = report.algorithm_ids.size();

    auto cell_mean = [&](std::size_t d, std::size_t a,
                         const std::string& metric) -> std::optional<double> {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t r = 0; r < report.repeats; ++r) {
            const auto& c = report.cell(d, a, r);
            if (!c.ok) continue;
            if (auto v = metric_value(c, metric)) {
                sum += *v;
                ++n;
            }
        }
        if (n == 0) return std::nullopt;
        return sum / static_cast<double>(n);
    };
    auto rank_of = [&](const std::string& dataset, const std::string& metric,
                       const std::string& algo) -> std::optional<std::size_t> {
        for (const auto& entry : report.ranks) {
            if (entry.dataset != dataset || entry.metric != metric) continue;
            auto it = entry.algorithm_rank.find(algo);
            if (it != entry.algorithm_rank.end()) return it->second;
        }
        return std::nullopt;
    };

    for (const auto& [metric, bigger_better] : rank_metrics()) {
        bool any = false;
        for (std::size_t d = 0; d < n_datasets && !any; ++d)
            for (std::size_t a = 0; a < n_algos && !any; ++a)
                if (cell_mean(d, a, metric)) any = true;
        if (!any) continue;

        std::ofstream out(dir / "tables" / (metric + ".csv"), std::ios::binary);
        out << "algorithm";
        for (const auto& name : report.dataset_names) out << ',' << name << ',' << name << "_rank";
        out << '\n';
        for (std::size_t a = 0; a < n_algos; ++a) {
            out << report.algorithm_ids[a];
            for (std::size_t d = 0; d < n_datasets; ++d) {
                out << ',';
                if (auto v = cell_mean(d, a, metric)) out << fmt(*v);
                out << ',';
                if (auto r = rank_of(report.dataset_names[d], metric, report.algorithm_ids[a]))
                    out << "rank=" << *r;
            }
            out << '\n';
        }
    }

    {
        std::ofstream out(dir / "runtime.csv", std::ios::binary);
        out << "dataset,rows,algorithm,seconds\n";
        for (const auto& c : report.cells) {
            if (!c.ok) continue;
            out << report.dataset_names[c.dataset] << ',' << report.dataset_rows[c.dataset]
                << ',' << report.algorithm_ids[c.algorithm] << ',' << fmt(c.generation_seconds)
                << '\n';
        }
    }

    {
        std::ofstream out(dir / "radar.csv", std::ios::binary);
        out << "algorithm,privacy,statistical_similarity,marginal_similarity,model,scalability\n";
        for (const auto& algo : report.algorithm_ids) {
            auto it = report.radar.find(algo);
            out << algo;
            const RadarScores r = it == report.radar.end() ? RadarScores{} : it->second;
            for (const auto& v :
                 {r.privacy, r.statistical, r.marginal, r.model, r.scalability}) {
                out << ',';
                if (v) out << fmt(*v);
            }
            out << '\n';
        }
    }
}

}  // namespace synthweave::harness
