#include "magnet/metrics.hpp"

#include <algorithm>

namespace magnet {

double node_recovery_rate(const std::vector<int>& kept_nodes,
                          const std::vector<int>& true_important) {
    if (true_important.empty()) throw UndefinedMetric("recovery rate needs a nonempty truth set");
    std::set<int> truth(true_important.begin(), true_important.end());
    int hit = 0;
    std::set<int> seen;
    for (int v : kept_nodes)
        if (seen.insert(v).second && truth.count(v)) ++hit;
    return static_cast<double>(hit) / static_cast<double>(truth.size());
}

RedundantCounts redundant_edge_counts(const AdjacencyMatrix& adjacency_before,
                                      const std::vector<std::pair<int, int>>& kept_edges,
                                      const std::vector<int>& important) {
    std::set<int> imp(important.begin(), important.end());
    auto redundant = [&](int i, int j) { return !imp.count(i) || !imp.count(j); };

    int before = 0;
    for (auto [i, j] : adjacency_before.edges())
        if (redundant(i, j)) ++before;
    int after = 0;
    for (auto [i, j] : kept_edges)
        if (redundant(i, j)) ++after;

    const long long n = adjacency_before.n_nodes();
    const long long m = static_cast<long long>(imp.size());
    const int possible = static_cast<int>(n * (n - 1) / 2 - m * (m - 1) / 2);
    return {before, after, possible};
}

double am_metric(int after, int possible) {
    if (possible <= 0) throw UndefinedMetric("AM undefined: no possible redundant pairs");
    return static_cast<double>(after) / static_cast<double>(possible);
}

double rm_metric(int before, int after) {
    if (before <= 0) throw UndefinedMetric("RM undefined: no redundant edges before reasoning");
    return static_cast<double>(before - after) / static_cast<double>(before);
}

}  // namespace magnet
