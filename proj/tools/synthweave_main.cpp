#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "synthweave/harness.hpp"

namespace {

using namespace synthweave;

std::map<std::string, double> parse_params(const std::vector<std::string>& raw) {
    std::map<std::string, double> out;
    for (const auto& kv : raw) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::runtime_error("--param expects key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        try {
            out[key] = std::stod(kv.substr(eq + 1));
        } catch (const std::exception&) {
            throw std::runtime_error("--param " + key + ": value is not a number");
        }
    }
    return out;
}

Table load_with_optional_sidecar(const std::string& csv, const std::string& schema_path) {
    std::optional<Schema> hint;
    if (!schema_path.empty()) hint = load_schema_sidecar(schema_path);
    return load_csv(csv, hint);
}

int cmd_run(const std::string& config_path) {
    harness::RunConfig config;
    try {
        config = harness::load_run_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    const auto report = harness::run_benchmark(config);
    harness::emit_report(report, config.output_dir);
    std::size_t failed = 0;
    for (const auto& c : report.cells)
        if (!c.ok) {
            ++failed;
            std::cerr << "cell failed (" << report.dataset_names[c.dataset] << ", "
                      << report.algorithm_ids[c.algorithm] << ", repeat " << c.repeat
                      << "): " << c.error << "\n";
        }
    std::cout << "wrote " << config.output_dir << "/report.json (" << report.cells.size()
              << " cells, " << failed << " failed)\n";
    return failed == 0 ? 0 : 2;
}

int cmd_generate(const std::string& input, const std::string& schema_path,
                 const std::string& algo, std::size_t n, std::uint64_t seed,
                 const std::vector<std::string>& raw_params, const std::string& out_path) {
    try {
        const Table train = load_with_optional_sidecar(input, schema_path);
        const Table synth = harness::generate(train, algo, parse_params(raw_params), n, seed);
        save_csv(synth, out_path);
        std::cout << "wrote " << out_path << " (" << synth.n_rows() << " rows)\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "generate failed: " << e.what() << "\n";
        return 1;
    }
}

int cmd_evaluate(const std::string& original_path, const std::string& synthetic_path,
                 const std::string& schema_path, std::uint64_t seed,
                 const harness::MetricParams& params, const std::string& out_path) {
    try {
        const Table original = load_with_optional_sidecar(original_path, schema_path);
        // the original's schema types the synthetic file so column kinds agree
        const Table synthetic = load_csv(synthetic_path, original.schema());
        const auto eval = harness::evaluate_pair(original, synthetic, seed, params);

        nlohmann::json doc;
        doc["privacy"] = eval.privacy;
        doc["statistical_similarity"] = eval.statistical;
        doc["marginal_similarity"] = eval.marginal;
        if (eval.model) {
            auto set_to_json = [](const metrics::MetricSet& s) {
                nlohmann::json j = nlohmann::json::object();
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
            };
            doc["model"] = {{"on_synthetic", set_to_json(eval.model->on_synthetic)},
                            {"on_original", set_to_json(eval.model->on_original)}};
        }
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
        out << doc.dump(2) << "\n";
        std::cout << "wrote " << out_path << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "evaluate failed: " << e.what() << "\n";
        return 1;
    }
}

int cmd_rank(const std::string& report_path) {
    try {
        const auto report = harness::load_report(report_path);
        for (std::size_t d = 0; d < report.dataset_names.size(); ++d) {
            for (const auto& [metric, bigger_better] : harness::rank_metrics()) {
                std::vector<stats::ScoreGroup> groups;
                for (std::size_t a = 0; a < report.algorithm_ids.size(); ++a) {
                    stats::ScoreGroup g{report.algorithm_ids[a], {}};
                    for (std::size_t r = 0; r < report.repeats; ++r) {
                        const auto& c = report.cell(d, a, r);
                        if (!c.ok) continue;
                        auto pick = [&](const std::optional<double>& v) {
                            if (v) g.scores.push_back(*v);
                        };
                        if (metric == "privacy") pick(c.privacy);
                        else if (metric == "statistical_similarity") pick(c.statistical);
                        else if (metric == "marginal_similarity") pick(c.marginal);
                        else if (c.model) {
                            const auto& s = c.model->on_synthetic;
                            if (metric == "accuracy") pick(s.accuracy);
                            else if (metric == "precision") pick(s.precision);
                            else if (metric == "recall") pick(s.recall);
                            else if (metric == "mcc") pick(s.mcc);
                            else if (metric == "rmse") pick(s.rmse);
                            else if (metric == "r2") pick(s.r2);
                            else if (metric == "spearman") pick(s.spearman);
                        }
                    }
                    if (!g.scores.empty()) groups.push_back(std::move(g));
                }
                if (groups.empty()) continue;
                const auto ranked = stats::scott_knott(groups, bigger_better);
                std::cout << report.dataset_names[d] << " / " << metric << ":";
                for (std::size_t r = 0; r < ranked.ranks.size(); ++r) {
                    std::cout << "  rank" << (r + 1) << "=[";
                    for (std::size_t g = 0; g < ranked.ranks[r].size(); ++g)
                        std::cout << (g ? " " : "") << ranked.ranks[r][g].id;
                    std::cout << "]";
                }
                std::cout << "\n";
            }
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "rank failed: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthweave: tabular synthetic-data generators and their evaluation harness"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a full benchmark from a JSON config");
    std::string config_path;
    run->add_option("--config", config_path, "path to the run configuration")->required();

    auto* gen = app.add_subcommand("generate", "fit one generator and write synthetic rows");
    std::string gen_input, gen_schema, gen_algo, gen_out;
    std::size_t gen_n = 0;
    std::uint64_t gen_seed = 0;
    std::vector<std::string> gen_params;
    gen->add_option("--input", gen_input, "training CSV")->required();
    gen->add_option("--schema", gen_schema, "schema sidecar for the training CSV");
    gen->add_option("--algo", gen_algo, "rrp | knn | marginal | copula")->required();
    gen->add_option("--n", gen_n, "number of synthetic rows")->required();
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--param", gen_params, "algorithm parameter as key=value (repeatable)");
    gen->add_option("--out", gen_out, "output CSV path")->required();

    auto* eval = app.add_subcommand("evaluate", "score a synthetic table against its original");
    std::string eval_original, eval_synthetic, eval_schema, eval_out;
    std::uint64_t eval_seed = 0;
    harness::MetricParams metric_params;
    eval->add_option("--original", eval_original, "original CSV")->required();
    eval->add_option("--synthetic", eval_synthetic, "synthetic CSV")->required();
    eval->add_option("--schema", eval_schema, "schema sidecar for the original CSV");
    eval->add_option("--seed", eval_seed, "train/test split seed");
    eval->add_option("--privacy-k", metric_params.privacy_k, "neighborhood size for privacy");
    eval->add_option("--marginal-k", metric_params.marginal_k,
                     "k for the density estimate (0 = auto)");
    eval->add_option("--marginal-grid", metric_params.marginal_grid, "density grid points");
    eval->add_option("--out", eval_out, "output JSON path")->required();

    auto* rank = app.add_subcommand("rank", "recompute rank groups from a report");
    std::string rank_report;
    rank->add_option("--report", rank_report, "path to report.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) return cmd_run(config_path);
        if (gen->parsed())
            return cmd_generate(gen_input, gen_schema, gen_algo, gen_n, gen_seed, gen_params,
                                gen_out);
        if (eval->parsed())
            return cmd_evaluate(eval_original, eval_synthetic, eval_schema, eval_seed,
                                metric_params, eval_out);
        if (rank->parsed()) return cmd_rank(rank_report);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
