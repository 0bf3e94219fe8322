#include "simdetect/structure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "simdetect/errors.hpp"

namespace simdetect {

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(std::size_t x, std::size_t y) {
        x = find(x);
        y = find(y);
        if (x == y) return false;
        if (y < x) std::swap(x, y);
        parent_[y] = x;
        return true;
    }

private:
    std::vector<std::size_t> parent_;
};

void check_bins(std::size_t bins) {
    if (bins < 2) throw AnalysisError("histogram needs at least 2 bins");
}

ThresholdGraph build_graph(const DistanceMatrix& m, double t, const std::vector<bool>& keep) {
    if (!(t >= 0.0 && t <= 1.0)) throw AnalysisError("threshold must lie in [0,1]");
    const std::size_t n = m.size();
    ThresholdGraph g;
    g.threshold = t;
    for (std::size_t i = 0; i < n; ++i) {
        if (!keep[i]) continue;
        for (std::size_t j = i + 1; j < n; ++j)
            if (keep[j] && m.at(i, j) <= t) g.edges.push_back({i, j, m.at(i, j), false});
    }
    std::stable_sort(g.edges.begin(), g.edges.end(),
                     [](const GraphEdge& x, const GraphEdge& y) { return x.distance < y.distance; });
    DisjointSets sets(n);
    std::vector<bool> present(n, false);
    for (auto& e : g.edges) {
        e.elided = !sets.unite(e.i, e.j);
        present[e.i] = present[e.j] = true;
    }
    for (std::size_t i = 0; i < n; ++i)
        if (present[i]) g.vertices.push_back(i);
    return g;
}

}  // namespace

std::size_t bin_of(double value, std::size_t bins) {
    const double scaled = std::floor(std::clamp(value, 0.0, 1.0) * static_cast<double>(bins));
    return std::min(bins - 1, static_cast<std::size_t>(scaled));
}

Histogram global_histogram(const DistanceMatrix& m, std::size_t bins) {
    check_bins(bins);
    Histogram h;
    h.bins = bins;
    h.counts.assign(bins, 0);
    for (double v : m.upper_triangle()) {
        ++h.counts[bin_of(v, bins)];
        ++h.total;
    }
    return h;
}

Histogram row_histogram(const DistanceMatrix& m, std::string_view id, std::size_t bins) {
    check_bins(bins);
    const auto k = m.index_of(id);
    if (!k) throw AnalysisError("unknown submission id '" + std::string(id) + "'");
    Histogram h;
    h.bins = bins;
    h.counts.assign(bins, 0);
    for (double v : m.row_values(*k)) {
        ++h.counts[bin_of(v, bins)];
        ++h.total;
    }
    return h;
}

ThresholdGraph threshold_graph(const DistanceMatrix& m, double t) {
    return build_graph(m, t, std::vector<bool>(m.size(), true));
}

ThresholdGraph threshold_graph(const DistanceMatrix& m, double t, std::string_view focus, std::size_t hops) {
    const auto start = m.index_of(focus);
    if (!start) throw AnalysisError("unknown submission id '" + std::string(focus) + "'");
    if (!(t >= 0.0 && t <= 1.0)) throw AnalysisError("threshold must lie in [0,1]");
    const std::size_t n = m.size();
    std::vector<std::size_t> depth(n, SIZE_MAX);
    std::queue<std::size_t> frontier;
    depth[*start] = 0;
    frontier.push(*start);
    while (!frontier.empty()) {
        const std::size_t v = frontier.front();
        frontier.pop();
        if (depth[v] == hops) continue;
        for (std::size_t w = 0; w < n; ++w) {
            if (w != v && depth[w] == SIZE_MAX && m.at(v, w) <= t) {
                depth[w] = depth[v] + 1;
                frontier.push(w);
            }
        }
    }
    std::vector<bool> keep(n);
    for (std::size_t i = 0; i < n; ++i) keep[i] = depth[i] != SIZE_MAX;
    auto g = build_graph(m, t, keep);
    if (g.vertices.empty()) g.vertices.push_back(*start);
    return g;
}

Linkage parse_linkage(std::string_view name) {
    if (name == "single") return Linkage::Single;
    if (name == "average") return Linkage::Average;
    if (name == "complete") return Linkage::Complete;
    throw ConfigError("unknown linkage '" + std::string(name) + "'");
}

std::string_view to_string(Linkage l) {
    switch (l) {
        case Linkage::Single: return "single";
        case Linkage::Average: return "average";
        case Linkage::Complete: return "complete";
    }
    return "?";
}

Dendrogram dendrogram(const DistanceMatrix& m, Linkage linkage) {
    const std::size_t n = m.size();
    if (n < 2) throw AnalysisError("dendrogram needs at least 2 submissions");
    const std::size_t total = 2 * n - 1;
    // dist[x][y] holds the linkage value between clusters x and y; for
    // average linkage it holds the sum of member distances instead, so the
    // mean is always formed from original values.
    std::vector<std::vector<double>> dist(total, std::vector<double>(total, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) dist[i][j] = m.at(i, j);
    std::vector<std::size_t> size(total, 1);
    std::vector<std::size_t> active(n);
    std::iota(active.begin(), active.end(), std::size_t{0});
    std::vector<std::pair<std::size_t, std::size_t>> children(total);

    auto value = [&](std::size_t x, std::size_t y) {
        if (linkage == Linkage::Average) return dist[x][y] / static_cast<double>(size[x] * size[y]);
        return dist[x][y];
    };

    Dendrogram d;
    d.linkage = linkage;
    for (std::size_t step = 0; step < n - 1; ++step) {
        // active is ascending, so the first strict minimum has the smallest ids
        std::size_t bx = 0, by = 0;
        double best = 0.0;
        bool have = false;
        for (std::size_t p = 0; p < active.size(); ++p) {
            for (std::size_t q = p + 1; q < active.size(); ++q) {
                const double v = value(active[p], active[q]);
                if (!have || v < best) {
                    best = v;
                    bx = active[p];
                    by = active[q];
                    have = true;
                }
            }
        }
        const std::size_t c = n + step;
        size[c] = size[bx] + size[by];
        children[c] = {bx, by};
        for (std::size_t k : active) {
            if (k == bx || k == by) continue;
            double v = 0.0;
            switch (linkage) {
                case Linkage::Single: v = std::min(dist[bx][k], dist[by][k]); break;
                case Linkage::Complete: v = std::max(dist[bx][k], dist[by][k]); break;
                case Linkage::Average: v = dist[bx][k] + dist[by][k]; break;
            }
            dist[c][k] = dist[k][c] = v;
        }
        d.merges.push_back({bx, by, best, size[c]});
        std::erase_if(active, [&](std::size_t k) { return k == bx || k == by; });
        active.push_back(c);
    }

    std::vector<std::size_t> stack{total - 1};
    while (!stack.empty()) {
        const std::size_t c = stack.back();
        stack.pop_back();
        if (c < n) {
            d.leaf_order.push_back(c);
        } else {
            stack.push_back(children[c].second);
            stack.push_back(children[c].first);
        }
    }
    return d;
}

std::vector<std::size_t> cut(const Dendrogram& d, std::size_t n, double t) {
    DisjointSets sets(2 * n - 1);
    for (std::size_t k = 0; k < d.merges.size(); ++k) {
        if (d.merges[k].height > t) continue;
        sets.unite(d.merges[k].a, n + k);
        sets.unite(d.merges[k].b, n + k);
    }
    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = sets.find(i);
    return labels;
}

nlohmann::json to_json(const Histogram& h) {
    return {{"bins", h.bins}, {"counts", h.counts}, {"total", h.total}};
}

nlohmann::json to_json(const ThresholdGraph& g, const std::vector<std::string>& ids) {
    nlohmann::json vertices = nlohmann::json::array();
    for (auto v : g.vertices) vertices.push_back(ids.at(v));
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : g.edges)
        edges.push_back({{"a", ids.at(e.i)}, {"b", ids.at(e.j)}, {"distance", e.distance}, {"elided", e.elided}});
    return {{"threshold", g.threshold}, {"vertices", std::move(vertices)}, {"edges", std::move(edges)}};
}

nlohmann::json to_json(const Dendrogram& d, const std::vector<std::string>& ids) {
    nlohmann::json merges = nlohmann::json::array();
    for (const auto& mg : d.merges)
        merges.push_back({{"a", mg.a}, {"b", mg.b}, {"height", mg.height}, {"size", mg.size}});
    nlohmann::json order = nlohmann::json::array();
    for (auto leaf : d.leaf_order) order.push_back(ids.at(leaf));
    return {{"linkage", to_string(d.linkage)}, {"merges", std::move(merges)}, {"leaf_order", std::move(order)}};
}

Dendrogram dendrogram_from_json(const nlohmann::json& j, const DistanceMatrix& m) {
    try {
        Dendrogram d;
        d.linkage = parse_linkage(j.at("linkage").get<std::string>());
        for (const auto& mg : j.at("merges"))
            d.merges.push_back({mg.at("a").get<std::size_t>(), mg.at("b").get<std::size_t>(),
                                mg.at("height").get<double>(), mg.at("size").get<std::size_t>()});
        for (const auto& id : j.at("leaf_order")) {
            const auto k = m.index_of(id.get<std::string>());
            if (!k) throw FormatError("dendrogram names unknown id");
            d.leaf_order.push_back(*k);
        }
        if (d.merges.size() + 1 != m.size() || d.leaf_order.size() != m.size())
            throw FormatError("dendrogram does not match the matrix size");
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed dendrogram: ") + e.what());
    } catch (const ConfigError& e) {
        throw FormatError(std::string("malformed dendrogram: ") + e.what());
    }
}

}  // namespace simdetect
