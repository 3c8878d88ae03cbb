#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glens/date.hpp"
#include "glens/graph.hpp"

namespace glens::metrics {

enum class MetricKind { hub, authority, pagerank, kshell, eigenvector, betweenness, closeness };

inline constexpr std::array<MetricKind, 7> kAllMetrics = {
    MetricKind::hub,         MetricKind::authority,   MetricKind::pagerank, MetricKind::kshell,
    MetricKind::eigenvector, MetricKind::betweenness, MetricKind::closeness};

std::string_view to_string(MetricKind kind);
std::optional<MetricKind> parse_metric(std::string_view name);

struct NodeMetrics {
    std::string id;
    double hub = 0.0;
    double authority = 0.0;
    double pagerank = 0.0;
    int kshell = 0;
    double eigenvector = 0.0;
    double betweenness = 0.0;
    double closeness = 0.0;

    double value(MetricKind kind) const;
};

struct PowerIteration {
    double damping = 0.85;
    double tolerance = 1e-10;
    int max_iterations = 10000;
};

// PageRank on a directed view; dangling mass is spread uniformly. Sums to 1.
std::vector<double> pagerank(const graph::SimpleGraph& g, const PowerIteration& opts = {});

struct HitsScores {
    std::vector<double> hub;
    std::vector<double> authority;
};

// HITS on a directed view, solved per weakly connected component; hub and authority
// have unit L2 norm on every component that has an edge and are 0 elsewhere.
HitsScores hits(const graph::SimpleGraph& g, const PowerIteration& opts = {});

// Undirected measures (a directed input is symmetrized first).
std::vector<int> kshell(const graph::SimpleGraph& g);
// Leading eigenvector per connected component, unit norm per component with an edge.
std::vector<double> eigenvector_centrality(const graph::SimpleGraph& g, const PowerIteration& opts = {});
// Brandes, normalized by (n-1)(n-2)/2.
std::vector<double> betweenness(const graph::SimpleGraph& g);
// Harmonic closeness: sum over v != u of 1/d(u,v), divided by n-1.
std::vector<double> closeness(const graph::SimpleGraph& g);

// All seven measures. `directed` is the directed simple view of a snapshot; the undirected
// measures use its symmetrization. Throws ConvergenceFailure(metric).
std::vector<NodeMetrics> compute_centralities(const graph::SimpleGraph& directed, const PowerIteration& opts = {});
std::vector<NodeMetrics> compute_centralities(const graph::GuaranteeNetwork& net, const graph::Snapshot& snap,
                                              const PowerIteration& opts = {});

// Delimited export: id plus the seven metric columns.
std::string metrics_to_csv(const std::vector<NodeMetrics>& metrics);

struct HistogramBin {
    double lower = 0.0;
    double upper = 0.0;
    int node_count = 0;
    int default_count = 0;
    std::optional<double> default_rate;  // absent for empty bins
};

struct MetricHistogram {
    MetricKind kind = MetricKind::authority;
    std::vector<double> edges;  // bin_count + 1 boundaries
    std::vector<HistogramBin> bins;
};

// Equal-width bins over the observed range; the maximum lands in the last bin.
// `defaulted[i]` flags metrics[i].
MetricHistogram default_rate_histogram(const std::vector<NodeMetrics>& metrics, const std::vector<bool>& defaulted,
                                       MetricKind kind, int bin_count = 10);

struct RiskCell {
    std::string enterprise;
    Date window_end;
    double probability = 0.0;
};

struct HeatmapGrid {
    std::vector<std::string> rows;                   // enterprise ids, sorted
    std::vector<Date> columns;                       // window end dates, sorted
    std::vector<std::vector<std::optional<double>>> cells;  // [row][column]

    std::size_t present_cells() const;
};

HeatmapGrid assemble_heatmap(const std::vector<RiskCell>& predictions);

}  // namespace glens::metrics
