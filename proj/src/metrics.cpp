#include "glens/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <queue>

#include "glens/error.hpp"

namespace glens::metrics {

using graph::SimpleGraph;

std::string_view to_string(MetricKind kind) {
    switch (kind) {
        case MetricKind::hub: return "hub";
        case MetricKind::authority: return "authority";
        case MetricKind::pagerank: return "pagerank";
        case MetricKind::kshell: return "kshell";
        case MetricKind::eigenvector: return "eigenvector";
        case MetricKind::betweenness: return "betweenness";
        case MetricKind::closeness: return "closeness";
    }
    return "unknown";
}

std::optional<MetricKind> parse_metric(std::string_view name) {
    for (auto k : kAllMetrics)
        if (to_string(k) == name) return k;
    return std::nullopt;
}

double NodeMetrics::value(MetricKind kind) const {
    switch (kind) {
        case MetricKind::hub: return hub;
        case MetricKind::authority: return authority;
        case MetricKind::pagerank: return pagerank;
        case MetricKind::kshell: return kshell;
        case MetricKind::eigenvector: return eigenvector;
        case MetricKind::betweenness: return betweenness;
        case MetricKind::closeness: return closeness;
    }
    return 0.0;
}

namespace {

// Weak component id per node, plus component count.
std::pair<std::vector<std::uint32_t>, std::uint32_t> components(const SimpleGraph& g) {
    const auto n = static_cast<std::uint32_t>(g.size());
    std::vector<std::uint32_t> comp(n, UINT32_MAX);
    std::uint32_t count = 0;
    std::vector<std::uint32_t> stack;
    for (std::uint32_t s = 0; s < n; ++s) {
        if (comp[s] != UINT32_MAX) continue;
        comp[s] = count;
        stack.push_back(s);
        while (!stack.empty()) {
            auto v = stack.back();
            stack.pop_back();
            auto visit = [&](const std::vector<graph::Neighbor>& l) {
                for (const auto& nb : l)
                    if (comp[nb.node] == UINT32_MAX) {
                        comp[nb.node] = count;
                        stack.push_back(nb.node);
                    }
            };
            visit(g.out(v));
            if (g.directed()) visit(g.in(v));
        }
        ++count;
    }
    return {std::move(comp), count};
}

void normalize_per_component(std::vector<double>& x, const std::vector<std::uint32_t>& comp, std::uint32_t count) {
    std::vector<double> norm(count, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) norm[comp[i]] += x[i] * x[i];
    for (auto& v : norm) v = std::sqrt(v);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = norm[comp[i]] > 0.0 ? x[i] / norm[comp[i]] : 0.0;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

SimpleGraph undirected_of(const SimpleGraph& g) { return g.directed() ? g.as_undirected() : g; }

}  // namespace

std::vector<double> pagerank(const SimpleGraph& g, const PowerIteration& opts) {
    const std::size_t n = g.size();
    if (n == 0) return {};
    const double d = opts.damping;
    std::vector<double> x(n, 1.0 / static_cast<double>(n)), next(n);
    std::vector<double> outdeg(n);
    for (std::uint32_t v = 0; v < n; ++v) outdeg[v] = static_cast<double>(g.out(v).size());
    for (int it = 0; it < opts.max_iterations; ++it) {
        double dangling = 0.0;
        for (std::uint32_t v = 0; v < n; ++v)
            if (outdeg[v] == 0.0) dangling += x[v];
        const double base = (1.0 - d) / static_cast<double>(n) + d * dangling / static_cast<double>(n);
        for (std::uint32_t v = 0; v < n; ++v) {
            double s = 0.0;
            for (const auto& nb : g.in(v)) s += x[nb.node] / outdeg[nb.node];
            next[v] = base + d * s;
        }
        double change = 0.0;
        for (std::size_t v = 0; v < n; ++v) change += std::fabs(next[v] - x[v]);
        x.swap(next);
        if (change < opts.tolerance) {
            double total = std::accumulate(x.begin(), x.end(), 0.0);
            for (auto& v : x) v /= total;
            return x;
        }
    }
    throw Error("ConvergenceFailure", "pagerank did not converge", "pagerank");
}

HitsScores hits(const SimpleGraph& g, const PowerIteration& opts) {
    const std::size_t n = g.size();
    HitsScores s{std::vector<double>(n, 1.0), std::vector<double>(n, 0.0)};
    if (n == 0) return s;
    auto [comp, count] = components(g);
    normalize_per_component(s.hub, comp, count);
    std::vector<double> auth(n), hub(n);
    for (int it = 0; it < opts.max_iterations; ++it) {
        for (std::uint32_t v = 0; v < n; ++v) {
            double a = 0.0;
            for (const auto& nb : g.in(v)) a += s.hub[nb.node];
            auth[v] = a;
        }
        normalize_per_component(auth, comp, count);
        for (std::uint32_t v = 0; v < n; ++v) {
            double h = 0.0;
            for (const auto& nb : g.out(v)) h += auth[nb.node];
            hub[v] = h;
        }
        normalize_per_component(hub, comp, count);
        double change = std::max(max_abs_diff(auth, s.authority), max_abs_diff(hub, s.hub));
        s.authority.swap(auth);
        s.hub.swap(hub);
        if (change < opts.tolerance) return s;
    }
    throw Error("ConvergenceFailure", "HITS did not converge", "hits");
}

std::vector<int> kshell(const SimpleGraph& input) {
    const SimpleGraph g = undirected_of(input);
    const std::size_t n = g.size();
    std::vector<int> deg(n), core(n, 0);
    int max_deg = 0;
    for (std::uint32_t v = 0; v < n; ++v) {
        deg[v] = static_cast<int>(g.out(v).size());
        max_deg = std::max(max_deg, deg[v]);
    }
    // Batagelj-Zaversnik bucket peeling.
    std::vector<std::size_t> bin(static_cast<std::size_t>(max_deg) + 1, 0);
    for (auto d : deg) ++bin[static_cast<std::size_t>(d)];
    std::size_t start = 0;
    for (auto& b : bin) {
        auto c = b;
        b = start;
        start += c;
    }
    std::vector<std::uint32_t> vert(n);
    std::vector<std::size_t> pos(n);
    for (std::uint32_t v = 0; v < n; ++v) {
        pos[v] = bin[static_cast<std::size_t>(deg[v])]++;
        vert[pos[v]] = v;
    }
    for (std::size_t d = bin.size() - 1; d > 0; --d) bin[d] = bin[d - 1];
    if (!bin.empty()) bin[0] = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto v = vert[i];
        core[v] = deg[v];
        for (const auto& nb : g.out(v)) {
            auto u = nb.node;
            if (deg[u] > deg[v]) {
                auto du = static_cast<std::size_t>(deg[u]);
                auto pu = pos[u];
                auto pw = bin[du];
                auto w = vert[pw];
                if (u != w) {
                    pos[u] = pw;
                    vert[pu] = w;
                    pos[w] = pu;
                    vert[pw] = u;
                }
                ++bin[du];
                --deg[u];
            }
        }
    }
    return core;
}

std::vector<double> eigenvector_centrality(const SimpleGraph& input, const PowerIteration& opts) {
    const SimpleGraph g = undirected_of(input);
    const std::size_t n = g.size();
    std::vector<double> x(n, 1.0), next(n);
    if (n == 0) return x;
    auto [comp, count] = components(g);
    normalize_per_component(x, comp, count);
    // Iterating with A + I keeps bipartite components from oscillating.
    for (int it = 0; it < opts.max_iterations; ++it) {
        for (std::uint32_t v = 0; v < n; ++v) {
            double s = x[v];
            for (const auto& nb : g.out(v)) s += x[nb.node];
            next[v] = s;
        }
        normalize_per_component(next, comp, count);
        double change = max_abs_diff(next, x);
        x.swap(next);
        if (change < opts.tolerance) {
            for (std::uint32_t v = 0; v < n; ++v)
                if (g.out(v).empty()) x[v] = 0.0;
            return x;
        }
    }
    throw Error("ConvergenceFailure", "eigenvector centrality did not converge", "eigenvector");
}

std::vector<double> betweenness(const SimpleGraph& input) {
    const SimpleGraph g = undirected_of(input);
    const std::size_t n = g.size();
    std::vector<double> cb(n, 0.0);
    if (n < 3) return cb;
    std::vector<std::vector<std::uint32_t>> preds(n);
    std::vector<double> sigma(n), delta(n);
    std::vector<long> dist(n);
    std::vector<std::uint32_t> order;
    order.reserve(n);
    std::queue<std::uint32_t> q;
    for (std::uint32_t s = 0; s < n; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            preds[i].clear();
            sigma[i] = 0.0;
            delta[i] = 0.0;
            dist[i] = -1;
        }
        order.clear();
        sigma[s] = 1.0;
        dist[s] = 0;
        q.push(s);
        while (!q.empty()) {
            auto v = q.front();
            q.pop();
            order.push_back(v);
            for (const auto& nb : g.out(v)) {
                auto w = nb.node;
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    q.push(w);
                }
                if (dist[w] == dist[v] + 1) {
                    sigma[w] += sigma[v];
                    preds[w].push_back(v);
                }
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            auto w = *it;
            for (auto v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            if (w != s) cb[w] += delta[w];
        }
    }
    // Each unordered pair was counted from both endpoints.
    const double nn = static_cast<double>(n);
    const double scale = 2.0 / ((nn - 1.0) * (nn - 2.0));
    for (auto& v : cb) v = v / 2.0 * scale;
    return cb;
}

std::vector<double> closeness(const SimpleGraph& input) {
    const SimpleGraph g = undirected_of(input);
    const std::size_t n = g.size();
    std::vector<double> c(n, 0.0);
    if (n < 2) return c;
    std::vector<long> dist(n);
    std::queue<std::uint32_t> q;
    for (std::uint32_t s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[s] = 0;
        q.push(s);
        double sum = 0.0;
        while (!q.empty()) {
            auto v = q.front();
            q.pop();
            if (v != s) sum += 1.0 / static_cast<double>(dist[v]);
            for (const auto& nb : g.out(v))
                if (dist[nb.node] < 0) {
                    dist[nb.node] = dist[v] + 1;
                    q.push(nb.node);
                }
        }
        c[s] = sum / static_cast<double>(n - 1);
    }
    return c;
}

std::vector<NodeMetrics> compute_centralities(const SimpleGraph& directed, const PowerIteration& opts) {
    if (directed.size() == 0) throw Error("EmptySnapshot", "centralities need a non-empty snapshot");
    const SimpleGraph undirected = undirected_of(directed);
    auto h = hits(directed, opts);
    auto pr = pagerank(directed, opts);
    auto ks = kshell(undirected);
    auto ev = eigenvector_centrality(undirected, opts);
    auto bt = betweenness(undirected);
    auto cl = closeness(undirected);
    std::vector<NodeMetrics> out(directed.size());
    for (std::uint32_t v = 0; v < directed.size(); ++v)
        out[v] = {directed.id(v), h.hub[v], h.authority[v], pr[v], ks[v], ev[v], bt[v], cl[v]};
    return out;
}

std::vector<NodeMetrics> compute_centralities(const graph::GuaranteeNetwork& net, const graph::Snapshot& snap,
                                              const PowerIteration& opts) {
    return compute_centralities(graph::simple_view(net, snap, graph::ViewMode::directed), opts);
}

std::string metrics_to_csv(const std::vector<NodeMetrics>& metrics) {
    std::string out = "id,hub,authority,pagerank,kshell,eigenvector,betweenness,closeness\n";
    char buf[512];
    for (const auto& m : metrics) {
        std::snprintf(buf, sizeof buf, ",%.12g,%.12g,%.12g,%d,%.12g,%.12g,%.12g\n", m.hub, m.authority, m.pagerank,
                      m.kshell, m.eigenvector, m.betweenness, m.closeness);
        out += m.id;
        out += buf;
    }
    return out;
}

MetricHistogram default_rate_histogram(const std::vector<NodeMetrics>& metrics, const std::vector<bool>& defaulted,
                                       MetricKind kind, int bin_count) {
    if (bin_count < 2) throw Error("InvalidArgument", "histogram needs at least 2 bins");
    if (defaulted.size() != metrics.size()) throw Error("InvalidArgument", "default flags do not match metrics");
    MetricHistogram h;
    h.kind = kind;
    const auto bins = static_cast<std::size_t>(bin_count);
    double lo = 0.0, hi = 0.0;
    if (!metrics.empty()) {
        lo = hi = metrics[0].value(kind);
        for (const auto& m : metrics) {
            lo = std::min(lo, m.value(kind));
            hi = std::max(hi, m.value(kind));
        }
    }
    const double width = (hi - lo) / static_cast<double>(bin_count);
    for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(i == bins ? hi : lo + width * static_cast<double>(i));
    h.bins.resize(bins);
    for (std::size_t i = 0; i < bins; ++i) {
        h.bins[i].lower = h.edges[i];
        h.bins[i].upper = h.edges[i + 1];
    }
    for (std::size_t i = 0; i < metrics.size(); ++i) {
        double v = metrics[i].value(kind);
        std::size_t b = width > 0.0 ? static_cast<std::size_t>((v - lo) / width) : 0;
        b = std::min(b, bins - 1);
        ++h.bins[b].node_count;
        if (defaulted[i]) ++h.bins[b].default_count;
    }
    for (auto& b : h.bins)
        if (b.node_count > 0) b.default_rate = static_cast<double>(b.default_count) / b.node_count;
    return h;
}

std::size_t HeatmapGrid::present_cells() const {
    std::size_t c = 0;
    for (const auto& row : cells)
        for (const auto& cell : row)
            if (cell) ++c;
    return c;
}

HeatmapGrid assemble_heatmap(const std::vector<RiskCell>& predictions) {
    HeatmapGrid grid;
    std::map<std::string, std::size_t> rows;
    std::map<Date, std::size_t> cols;
    for (const auto& p : predictions) {
        rows.emplace(p.enterprise, 0);
        cols.emplace(p.window_end, 0);
    }
    for (auto& [id, idx] : rows) {
        idx = grid.rows.size();
        grid.rows.push_back(id);
    }
    for (auto& [d, idx] : cols) {
        idx = grid.columns.size();
        grid.columns.push_back(d);
    }
    grid.cells.assign(grid.rows.size(), std::vector<std::optional<double>>(grid.columns.size()));
    for (const auto& p : predictions)
        grid.cells[rows[p.enterprise]][cols[p.window_end]] = std::clamp(p.probability, 0.0, 1.0);
    return grid;
}

}  // namespace glens::metrics
