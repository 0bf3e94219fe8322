#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "simdetect/distance_matrix.hpp"

namespace simdetect {

inline constexpr std::size_t kDefaultBins = 64;

/// Uniform bins over [0,1]; bin b covers [b/bins, (b+1)/bins), the last bin
/// is closed at 1.
struct Histogram {
    std::size_t bins = kDefaultBins;
    std::vector<std::size_t> counts;
    std::size_t total = 0;

    friend bool operator==(const Histogram&, const Histogram&) = default;
};

std::size_t bin_of(double value, std::size_t bins);

/// Over the n(n-1)/2 upper-triangle values. bins >= 2.
Histogram global_histogram(const DistanceMatrix& m, std::size_t bins = kDefaultBins);
/// Over the n-1 off-diagonal entries of one row; unknown id -> AnalysisError.
Histogram row_histogram(const DistanceMatrix& m, std::string_view id, std::size_t bins = kDefaultBins);

struct GraphEdge {
    std::size_t i = 0;  // i < j
    std::size_t j = 0;
    double distance = 0.0;
    bool elided = false;  // not part of the minimum spanning forest

    friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

struct ThresholdGraph {
    double threshold = 0.0;
    std::vector<std::size_t> vertices;  // ascending; only vertices with an edge
    std::vector<GraphEdge> edges;       // Kruskal order: distance, then (i, j)

    friend bool operator==(const ThresholdGraph&, const ThresholdGraph&) = default;
};

/// Every pair with D <= t; edges outside the Kruskal minimum spanning forest
/// of that subgraph are marked elided.
ThresholdGraph threshold_graph(const DistanceMatrix& m, double t);

/// The same graph restricted to vertices within `hops` edges of `focus` in
/// the thresholded graph; the spanning forest is recomputed on that
/// induced subgraph. The focus vertex is listed even if it has no edges.
ThresholdGraph threshold_graph(const DistanceMatrix& m, double t, std::string_view focus, std::size_t hops);

enum class Linkage { Single, Average, Complete };

Linkage parse_linkage(std::string_view name);  // ConfigError on unknown names
std::string_view to_string(Linkage l);

/// Leaves are clusters 0..n-1; merge k creates cluster n+k.
struct Merge {
    std::size_t a = 0;  // a < b
    std::size_t b = 0;
    double height = 0.0;
    std::size_t size = 0;

    friend bool operator==(const Merge&, const Merge&) = default;
};

struct Dendrogram {
    Linkage linkage = Linkage::Average;
    std::vector<Merge> merges;            // n-1 entries
    std::vector<std::size_t> leaf_order;  // permutation of 0..n-1

    friend bool operator==(const Dendrogram&, const Dendrogram&) = default;
};

/// Agglomerative clustering; equal distances merge the pair with the
/// smallest cluster ids first. n >= 2.
Dendrogram dendrogram(const DistanceMatrix& m, Linkage linkage = Linkage::Average);

/// Cluster label per leaf after applying every merge with height <= t.
/// Labels are the smallest leaf index in each cluster.
std::vector<std::size_t> cut(const Dendrogram& d, std::size_t n, double t);

nlohmann::json to_json(const Histogram& h);
nlohmann::json to_json(const ThresholdGraph& g, const std::vector<std::string>& ids);
nlohmann::json to_json(const Dendrogram& d, const std::vector<std::string>& ids);
Dendrogram dendrogram_from_json(const nlohmann::json& j, const DistanceMatrix& m);

}  // namespace simdetect
