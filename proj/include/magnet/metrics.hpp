#pragma once

#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "magnet/graph.hpp"

namespace magnet {

struct UndefinedMetric : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InterpretationMetrics {
    double recovery_rate = 0.0;
    double am = 0.0;
    double rm = 0.0;
    int redundant_before = 0;
    int redundant_after = 0;
    int possible_redundant = 0;
};

double node_recovery_rate(const std::vector<int>& kept_nodes,
                          const std::vector<int>& true_important);

// An edge is redundant iff at least one endpoint is non-important.
// possible = C(N,2) - C(|important|,2).
struct RedundantCounts {
    int before;
    int after;
    int possible;
};
RedundantCounts redundant_edge_counts(const AdjacencyMatrix& adjacency_before,
                                      const std::vector<std::pair<int, int>>& kept_edges,
                                      const std::vector<int>& important);

double am_metric(int after, int possible);
double rm_metric(int before, int after);

}  // namespace magnet
