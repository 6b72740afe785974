#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "magnet/bench.hpp"
#include "magnet/estimator.hpp"
#include "magnet/interpreter.hpp"
#include "magnet/io.hpp"
#include "magnet/metrics.hpp"
#include "magnet/synth.hpp"

using nlohmann::json;

namespace {

int env_threads() {
    const char* v = std::getenv("MAGNET_THREADS");
    if (!v) return 1;
    const int t = std::atoi(v);
    return t > 0 ? t : 1;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw magnet::IoError("cannot write " + path);
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw magnet::IoError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MaGNet graph classification: estimation, interpretation, benchmarks"};
    app.require_subcommand(1);

    int setting = 1, n = 250, nodes = 30, important = 10, feat_dim = 25, k = 3, repeats = 10,
        iters = 300;
    std::uint64_t seed = 0;
    double split = 0.7, lambda_edge = 0.005, lambda_feature = 0.1, omega_start = 1.0,
           omega_end = 0.1;
    std::string data_path, model_path, out_path, baseline = "none", target_mode = "fixed_full";

    auto add_common_gen = [&](CLI::App* cmd) {
        cmd->add_option("--setting", setting)->check(CLI::IsMember({1, 2}));
        cmd->add_option("--n", n)->check(CLI::PositiveNumber);
        cmd->add_option("--nodes", nodes)->check(CLI::Range(2, 100000));
        cmd->add_option("--important", important)->check(CLI::PositiveNumber);
        cmd->add_option("--feat-dim", feat_dim)->check(CLI::PositiveNumber);
    };
    auto add_explain_opts = [&](CLI::App* cmd) {
        cmd->add_option("--lambda-edge", lambda_edge);
        cmd->add_option("--lambda-feature", lambda_feature);
        cmd->add_option("--omega-start", omega_start)->check(CLI::PositiveNumber);
        cmd->add_option("--omega-end", omega_end)->check(CLI::PositiveNumber);
        cmd->add_option("--iters", iters)->check(CLI::PositiveNumber);
        cmd->add_option("--target-mode", target_mode)
            ->check(CLI::IsMember({"fixed_full", "masked_features"}));
    };

    auto* cmd_generate = app.add_subcommand("generate", "generate a synthetic dataset");
    add_common_gen(cmd_generate);
    cmd_generate->add_option("--seed", seed)->required();
    cmd_generate->add_option("--out", out_path)->required();

    auto* cmd_train = app.add_subcommand("train", "train an estimation model");
    cmd_train->add_option("--data", data_path)->required();
    cmd_train->add_option("--k", k)->check(CLI::PositiveNumber);
    cmd_train->add_option("--seed", seed)->required();
    cmd_train->add_option("--out", out_path)->required();

    auto* cmd_evaluate = app.add_subcommand("evaluate", "report model accuracy on a dataset");
    cmd_evaluate->add_option("--data", data_path)->required();
    cmd_evaluate->add_option("--model", model_path)->required();

    auto* cmd_explain = app.add_subcommand("explain", "optimize edge and feature masks");
    cmd_explain->add_option("--data", data_path)->required();
    cmd_explain->add_option("--model", model_path)->required();
    cmd_explain->add_option("--out", out_path)->required();
    cmd_explain->add_option("--seed", seed)->required();
    add_explain_opts(cmd_explain);

    auto* cmd_benchmark = app.add_subcommand("benchmark", "run the full simulation pipeline");
    add_common_gen(cmd_benchmark);
    cmd_benchmark->add_option("--seed", seed)->required();
    cmd_benchmark->add_option("--k", k)->check(CLI::PositiveNumber);
    cmd_benchmark->add_option("--split", split)->check(CLI::Range(0.05, 0.95));
    cmd_benchmark->add_option("--repeats", repeats)->check(CLI::PositiveNumber);
    cmd_benchmark->add_option("--out", out_path)->required();
    cmd_benchmark->add_option("--baseline", baseline)->check(CLI::IsMember({"none", "gcn"}));
    add_explain_opts(cmd_benchmark);

    auto* cmd_report = app.add_subcommand("report", "render a benchmark CSV");
    cmd_report->add_option("--data", data_path)->required();
    cmd_report->add_option("--out", out_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << e.what() << '\n';
        return 2;
    }

    json run_config = {{"setting", setting},
                       {"n", n},
                       {"nodes", nodes},
                       {"important", important},
                       {"feat_dim", feat_dim},
                       {"k", k},
                       {"seed", seed},
                       {"split", split},
                       {"repeats", repeats},
                       {"lambda_edge", lambda_edge},
                       {"lambda_feature", lambda_feature},
                       {"omega_start", omega_start},
                       {"omega_end", omega_end},
                       {"iters", iters},
                       {"baseline", baseline},
                       {"target_mode", target_mode}};

    try {
        if (cmd_generate->parsed()) {
            if (important >= nodes) {
                std::cerr << "--important must be smaller than --nodes\n";
                return 2;
            }
            magnet::GraphDataset ds;
            if (setting == 1) {
                ds = magnet::generate_setting1(n, nodes, important, feat_dim, 0.1, seed);
            } else {
                magnet::GPKernelConfig imp{1.0, 1.0, 1e-6}, other{2.5, 1.0, 1e-6};
                ds = magnet::generate_setting2(n, nodes, important, feat_dim, 0.1, imp, other,
                                               seed);
            }
            magnet::save_dataset(ds, out_path, &run_config);
        } else if (cmd_train->parsed()) {
            auto ds = magnet::load_dataset(data_path);
            magnet::ActorConfig cfg;
            cfg.k_orders = k;
            cfg.seed = seed;
            auto model = magnet::train_magnet(ds, cfg);
            magnet::save_model(model, out_path, &run_config);
        } else if (cmd_evaluate->parsed()) {
            auto ds = magnet::load_dataset(data_path);
            auto model = magnet::load_model(model_path);
            std::cout << "accuracy " << magnet::evaluate_accuracy(model, ds) << '\n';
        } else if (cmd_explain->parsed()) {
            auto ds = magnet::load_dataset(data_path);
            auto model = magnet::load_model(model_path);
            magnet::ExplanationConfig cfg;
            cfg.lambda_edge = lambda_edge;
            cfg.lambda_feature = lambda_feature;
            cfg.omega_start = omega_start;
            cfg.omega_end = omega_end;
            cfg.iterations = iters;
            cfg.seed = seed;
            cfg.target_mode = target_mode == "masked_features"
                                  ? magnet::TargetMode::MaskedFeatures
                                  : magnet::TargetMode::FixedFull;
            auto [params, trajectory] = magnet::optimize_explanation(model, ds, cfg);
            std::optional<int> top_m;
            if (!ds.important_nodes.empty())
                top_m = static_cast<int>(ds.important_nodes.size());
            auto explanation =
                magnet::threshold_explanation(params, ds.adjacency, ds.feat_dim(), 0.5, 0.5, top_m);
            explanation.loss_trajectory = trajectory;
            magnet::save_explanation(explanation, out_path, &run_config);
        } else if (cmd_benchmark->parsed()) {
            if (important >= nodes) {
                std::cerr << "--important must be smaller than --nodes\n";
                return 2;
            }
            magnet::BenchmarkConfig cfg;
            cfg.setting = setting;
            cfg.n = n;
            cfg.n_nodes = nodes;
            cfg.n_important = important;
            cfg.feat_dim = feat_dim;
            cfg.split = split;
            cfg.repeats = repeats;
            cfg.seed = seed;
            cfg.actor.k_orders = k;
            cfg.explanation.lambda_edge = lambda_edge;
            cfg.explanation.lambda_feature = lambda_feature;
            cfg.explanation.omega_start = omega_start;
            cfg.explanation.omega_end = omega_end;
            cfg.explanation.iterations = iters;
            cfg.explanation.target_mode = target_mode == "masked_features"
                                              ? magnet::TargetMode::MaskedFeatures
                                              : magnet::TargetMode::FixedFull;
            cfg.run_gcn_baseline = baseline == "gcn";
            cfg.threads = env_threads();
            auto report = magnet::run_benchmark(cfg);
            write_file(out_path, magnet::report_to_csv(report));
        } else if (cmd_report->parsed()) {
            auto report = magnet::report_from_csv(read_file(data_path));
            std::cout << magnet::report_to_text(report);
            if (!out_path.empty()) write_file(out_path, magnet::report_to_svg(report));
        }
    } catch (const magnet::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
