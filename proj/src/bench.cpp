#include "magnet/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "magnet/metrics.hpp"

namespace magnet {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return substream(seed, index)();
}

std::pair<GraphDataset, GraphDataset> split_dataset(const GraphDataset& dataset,
                                                    double train_fraction, std::uint64_t seed) {
    const int n = static_cast<int>(dataset.instances.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto rng = substream(seed, 0x5EEDull);
    std::shuffle(order.begin(), order.end(), rng);
    const int n_train = static_cast<int>(std::lround(train_fraction * n));

    GraphDataset train, test;
    train.adjacency = test.adjacency = dataset.adjacency;
    train.important_nodes = test.important_nodes = dataset.important_nodes;
    train.meta = test.meta = dataset.meta;
    for (int i = 0; i < n; ++i)
        (i < n_train ? train : test).instances.push_back(dataset.instances[order[i]]);
    return {std::move(train), std::move(test)};
}

namespace {

struct RepetitionResult {
    double accuracy = 0.0;
    double gcn_accuracy = 0.0;
    double recovery = 0.0;
    double am = 0.0;
    double rm = 0.0;
};

GraphDataset generate(const BenchmarkConfig& cfg, std::uint64_t seed) {
    if (cfg.setting == 1)
        return generate_setting1(cfg.n, cfg.n_nodes, cfg.n_important, cfg.feat_dim, 0.1, seed);
    GPKernelConfig imp{1.0, 1.0, 1e-6}, other{2.5, 1.0, 1e-6};
    return generate_setting2(cfg.n, cfg.n_nodes, cfg.n_important, cfg.feat_dim, 0.1, imp, other,
                             seed);
}

RepetitionResult run_repetition(const BenchmarkConfig& cfg, int rep) {
    const std::uint64_t rep_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
    GraphDataset dataset = generate(cfg, rep_seed);
    auto [train, test] = split_dataset(dataset, cfg.split, rep_seed);

    ActorConfig actor = cfg.actor;
    actor.seed = rep_seed;
    MaGNetModel model = train_magnet(train, actor);

    RepetitionResult result;
    result.accuracy = evaluate_accuracy(model, test);
    if (cfg.run_gcn_baseline) {
        GcnModel gcn = train_gcn_baseline(train, 16, 200, 0.1, rep_seed);
        result.gcn_accuracy = gcn_accuracy(gcn, test);
    }

    if (cfg.run_interpretation) {
        GraphDataset subset;
        subset.adjacency = train.adjacency;
        subset.important_nodes = train.important_nodes;
        subset.meta = train.meta;
        const int m = std::min<int>(cfg.interpretation_subset,
                                    static_cast<int>(train.instances.size()));
        subset.instances.assign(train.instances.begin(), train.instances.begin() + m);

        ExplanationConfig expl = cfg.explanation;
        expl.seed = rep_seed;
        auto [params, trajectory] = optimize_explanation(model, subset, expl);
        Explanation ex = threshold_explanation(params, subset.adjacency, subset.feat_dim(), 0.5,
                                               0.5, cfg.n_important);
        result.recovery = node_recovery_rate(ex.kept_nodes, dataset.important_nodes);
        auto counts =
            redundant_edge_counts(dataset.adjacency, ex.kept_edges, dataset.important_nodes);
        result.am = am_metric(counts.after, counts.possible);
        result.rm = counts.before > 0 ? rm_metric(counts.before, counts.after) : 1.0;
    }
    return result;
}

std::pair<double, double> mean_sd(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace

BenchmarkReport run_benchmark(const BenchmarkConfig& cfg) {
    std::vector<RepetitionResult> results(static_cast<std::size_t>(cfg.repeats));
    const int threads = std::max(1, cfg.threads);
    if (threads == 1) {
        for (int rep = 0; rep < cfg.repeats; ++rep)
            results[static_cast<std::size_t>(rep)] = run_repetition(cfg, rep);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int t = 0; t < std::min(threads, cfg.repeats); ++t)
            pool.emplace_back([&] {
                for (int rep = next.fetch_add(1); rep < cfg.repeats; rep = next.fetch_add(1))
                    results[static_cast<std::size_t>(rep)] = run_repetition(cfg, rep);
            });
        for (auto& th : pool) th.join();
    }

    auto collect = [&](auto member) {
        std::vector<double> xs;
        xs.reserve(results.size());
        for (const auto& r : results) xs.push_back(r.*member);
        return xs;
    };
    BenchmarkReport report;
    auto push = [&](const std::string& method, const std::string& metric,
                    const std::vector<double>& xs) {
        auto [mean, sd] = mean_sd(xs);
        report.rows.push_back({cfg.setting, cfg.n, cfg.n_nodes, cfg.n_important, method, metric,
                               mean, sd, cfg.repeats});
    };
    push("magnet", "accuracy", collect(&RepetitionResult::accuracy));
    if (cfg.run_gcn_baseline) push("gcn", "accuracy", collect(&RepetitionResult::gcn_accuracy));
    if (cfg.run_interpretation) {
        push("magnet", "recovery", collect(&RepetitionResult::recovery));
        push("magnet", "am", collect(&RepetitionResult::am));
        push("magnet", "rm", collect(&RepetitionResult::rm));
    }
    return report;
}

namespace {

std::string fmt6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

}  // namespace

std::string report_to_csv(const BenchmarkReport& report) {
    std::string out = "setting,n,nodes,important,method,metric,mean,sd,repeats\n";
    for (const auto& r : report.rows) {
        out += std::to_string(r.setting) + ',' + std::to_string(r.n) + ',' +
               std::to_string(r.n_nodes) + ',' + std::to_string(r.n_important) + ',' + r.method +
               ',' + r.metric + ',' + fmt6(r.mean) + ',' + fmt6(r.sd) + ',' +
               std::to_string(r.repeats) + '\n';
    }
    return out;
}

BenchmarkReport report_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != "setting,n,nodes,important,method,metric,mean,sd,repeats")
        throw std::runtime_error("unexpected CSV header");
    BenchmarkReport report;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 9) throw std::runtime_error("bad CSV row: " + line);
        report.rows.push_back({std::stoi(fields[0]), std::stoi(fields[1]), std::stoi(fields[2]),
                               std::stoi(fields[3]), fields[4], fields[5], std::stod(fields[6]),
                               std::stod(fields[7]), std::stoi(fields[8])});
    }
    return report;
}

std::string report_to_text(const BenchmarkReport& report) {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-8s %-6s %-6s %-9s %-10s %-10s %-10s %-10s %s\n", "setting",
                  "n", "nodes", "important", "method", "metric", "mean", "sd", "repeats");
    out += buf;
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof(buf), "%-8d %-6d %-6d %-9d %-10s %-10s %-10s %-10s %d\n",
                      r.setting, r.n, r.n_nodes, r.n_important, r.method.c_str(),
                      r.metric.c_str(), fmt6(r.mean).c_str(), fmt6(r.sd).c_str(), r.repeats);
        out += buf;
    }
    return out;
}

std::string report_to_svg(const BenchmarkReport& report) {
    const int bar_w = 48, gap = 28, left = 70, bottom = 40, top = 30;
    const int height = 300;
    const int plot_h = height - top - bottom;
    const int width =
        left + static_cast<int>(report.rows.size()) * (bar_w + gap) + gap;

    double max_val = 1.0;
    for (const auto& r : report.rows) max_val = std::max(max_val, r.mean);

    std::string svg;
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\">\n",
                  width, height);
    svg += buf;
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // y axis with a few gridlines
    for (int tick = 0; tick <= 4; ++tick) {
        const double frac = tick / 4.0;
        const int y = top + static_cast<int>((1.0 - frac) * plot_h);
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"#ccc\"/>\n"
                      "<text x=\"%d\" y=\"%d\" font-size=\"11\" text-anchor=\"end\">%s</text>\n",
                      left, y, width - gap, y, left - 6, y + 4, fmt6(frac * max_val).c_str());
        svg += buf;
    }
    int x = left + gap;
    for (const auto& r : report.rows) {
        const int h = static_cast<int>(plot_h * (r.mean / max_val));
        std::snprintf(buf, sizeof(buf),
                      "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"#4878b0\"/>\n"
                      "<text x=\"%d\" y=\"%d\" font-size=\"10\" text-anchor=\"middle\">%s</text>\n"
                      "<text x=\"%d\" y=\"%d\" font-size=\"10\" text-anchor=\"middle\">%s</text>\n",
                      x, top + plot_h - h, bar_w, h, x + bar_w / 2, height - bottom + 14,
                      (r.method + ":" + r.metric).c_str(), x + bar_w / 2, top + plot_h - h - 4,
                      fmt6(r.mean).c_str());
        svg += buf;
        x += bar_w + gap;
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace magnet
