#include "glens/community.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>
#include <unordered_map>

#include "glens/error.hpp"
#include "glens/hash.hpp"

namespace glens::community {

// ---- Partition ---------------------------------------------------------------------

Partition::Partition(std::vector<std::string> ids, std::vector<Label> labels)
    : ids_(std::move(ids)), labels_(std::move(labels)) {
    if (ids_.size() != labels_.size()) throw Error("InvalidArgument", "partition ids and labels differ in length");
    for (Label l : labels_) next_label_ = std::max(next_label_, l + 1);
}

std::optional<Label> Partition::label_of(const std::string& id) const {
    for (std::size_t i = 0; i < ids_.size(); ++i)
        if (ids_[i] == id) return labels_[i];
    return std::nullopt;
}

std::map<Label, std::vector<std::uint32_t>> Partition::members() const {
    std::map<Label, std::vector<std::uint32_t>> m;
    for (std::uint32_t i = 0; i < labels_.size(); ++i) m[labels_[i]].push_back(i);
    return m;
}

std::set<Label> Partition::community_labels() const { return {labels_.begin(), labels_.end()}; }

bool Partition::has(Label l) const { return std::find(labels_.begin(), labels_.end(), l) != labels_.end(); }

std::string Partition::fingerprint() const {
    Fingerprint fp;
    for (std::size_t i = 0; i < ids_.size(); ++i) fp.add(ids_[i]).add(std::int64_t{labels_[i]});
    fp.add(std::int64_t{revision_});
    return fp.hex();
}

nlohmann::json Partition::to_json() const {
    nlohmann::json labels = nlohmann::json::object();
    for (std::size_t i = 0; i < ids_.size(); ++i) labels[ids_[i]] = labels_[i];
    nlohmann::json log = nlohmann::json::array();
    for (const auto& op : history_) log.push_back(community::to_json(op));
    return {{"revision", revision_}, {"labels", labels}, {"history", log}, {"fingerprint", fingerprint()}};
}

nlohmann::json to_json(const EditOp& op) {
    switch (op.kind) {
        case EditOp::Kind::merge: return {{"op", "merge"}, {"a", op.a}, {"b", op.b}};
        case EditOp::Kind::reassign: return {{"op", "reassign"}, {"node", op.node}, {"target", op.target}};
        case EditOp::Kind::split: {
            nlohmann::json cut = nlohmann::json::array();
            for (const auto& [u, v] : op.cut_edges) cut.push_back({u, v});
            return {{"op", "split"}, {"community", op.community}, {"cut", cut}};
        }
    }
    return {};
}

EditOp edit_from_json(const nlohmann::json& j) {
    EditOp op;
    try {
        const auto kind = j.at("op").get<std::string>();
        if (kind == "merge") {
            op.kind = EditOp::Kind::merge;
            op.a = j.at("a").get<Label>();
            op.b = j.at("b").get<Label>();
        } else if (kind == "reassign") {
            op.kind = EditOp::Kind::reassign;
            op.node = j.at("node").get<std::string>();
            op.target = j.at("target").get<Label>();
        } else if (kind == "split") {
            op.kind = EditOp::Kind::split;
            op.community = j.at("community").get<Label>();
            for (const auto& e : j.at("cut")) op.cut_edges.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
        } else {
            throw Error("InvalidEdit", "unknown community edit '" + kind + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error("InvalidEdit", std::string("malformed community edit: ") + e.what());
    }
    return op;
}

// ---- detection ---------------------------------------------------------------------------

namespace {

using SparseVec = std::vector<std::pair<std::uint32_t, double>>;

class Walker {
public:
    explicit Walker(const SimpleGraph& g) : g_(g), scratch_(g.size(), 0.0), seen_(g.size(), 0) {
        degree_.resize(g.size());
        for (std::uint32_t v = 0; v < g.size(); ++v) degree_[v] = 1.0 + static_cast<double>(g.out(v).size());
    }

    // Distribution after `steps` steps of a lazy walk (every node carries a unit self-loop).
    SparseVec walk(std::uint32_t start, int steps) {
        SparseVec cur{{start, 1.0}};
        for (int s = 0; s < steps; ++s) {
            touched_.clear();
            auto add = [&](std::uint32_t k, double p) {
                if (!seen_[k]) {
                    seen_[k] = 1;
                    touched_.push_back(k);
                }
                scratch_[k] += p;
            };
            for (auto [k, p] : cur) {
                double share = p / degree_[k];
                add(k, share);
                for (const auto& nb : g_.out(k)) add(nb.node, share);
            }
            std::sort(touched_.begin(), touched_.end());
            cur.clear();
            for (auto k : touched_) {
                cur.emplace_back(k, scratch_[k]);
                scratch_[k] = 0.0;
                seen_[k] = 0;
            }
        }
        return cur;
    }

    // Squared walk distance, each coordinate weighted by 1/degree.
    double distance2(const SparseVec& a, const SparseVec& b) const {
        double r = 0.0;
        std::size_t i = 0, j = 0;
        while (i < a.size() || j < b.size()) {
            if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
                r += a[i].second * a[i].second / degree_[a[i].first];
                ++i;
            } else if (i == a.size() || b[j].first < a[i].first) {
                r += b[j].second * b[j].second / degree_[b[j].first];
                ++j;
            } else {
                double d = a[i].second - b[j].second;
                r += d * d / degree_[a[i].first];
                ++i;
                ++j;
            }
        }
        return r;
    }

private:
    const SimpleGraph& g_;
    std::vector<double> degree_;
    std::vector<double> scratch_;
    std::vector<char> seen_;
    std::vector<std::uint32_t> touched_;
};

SparseVec combine(const SparseVec& a, double wa, const SparseVec& b, double wb) {
    SparseVec out;
    out.reserve(a.size() + b.size());
    const double total = wa + wb;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            out.emplace_back(a[i].first, a[i].second * wa / total);
            ++i;
        } else if (i == a.size() || b[j].first < a[i].first) {
            out.emplace_back(b[j].first, b[j].second * wb / total);
            ++j;
        } else {
            out.emplace_back(a[i].first, (a[i].second * wa + b[j].second * wb) / total);
            ++i;
            ++j;
        }
    }
    return out;
}

struct Community {
    double size = 0;
    SparseVec walk;
    double internal = 0;  // edges inside
    double degree = 0;    // sum of member degrees (no self-loops)
    std::map<std::uint32_t, std::pair<double, double>> neighbours;  // rep -> (edge weight, delta sigma)
};

struct UnionFind {
    std::vector<std::uint32_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
    std::uint32_t find(std::uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a < b) parent[b] = a;
        else if (b < a) parent[a] = b;
    }
};

// Clusters one connected component; merges are applied to `uf`.
void cluster_component(const SimpleGraph& g, const std::vector<std::uint32_t>& nodes, int steps, double m,
                       Walker& walker, UnionFind& uf) {
    if (nodes.size() < 2 || m == 0.0) return;
    const double n = static_cast<double>(nodes.size());
    std::unordered_map<std::uint32_t, Community> comms;
    for (auto v : nodes) {
        Community c;
        c.size = 1;
        c.walk = walker.walk(v, steps);
        c.degree = static_cast<double>(g.out(v).size());
        comms.emplace(v, std::move(c));
    }
    using Candidate = std::tuple<double, std::uint32_t, std::uint32_t>;
    std::set<Candidate> queue;
    auto delta_sigma = [&](const Community& a, const Community& b) {
        return (a.size * b.size / (a.size + b.size)) * walker.distance2(a.walk, b.walk) / n;
    };
    for (auto v : nodes) {
        auto& cv = comms[v];
        for (const auto& nb : g.out(v)) {
            if (nb.node <= v) continue;
            auto& cu = comms[nb.node];
            double ds = delta_sigma(cv, cu);
            cv.neighbours[nb.node] = {1.0, ds};
            cu.neighbours[v] = {1.0, ds};
            queue.insert({ds, v, nb.node});
        }
    }

    double q = 0.0;
    for (auto v : nodes) {
        double d = comms[v].degree / (2.0 * m);
        q -= d * d;
    }
    std::vector<std::pair<std::uint32_t, std::uint32_t>> merges;
    std::vector<double> q_after;
    while (!queue.empty()) {
        auto [ds, a, b] = *queue.begin();
        Community ca = std::move(comms[a]);
        Community cb = std::move(comms[b]);
        comms.erase(a);
        comms.erase(b);
        for (const auto& [nb, wd] : ca.neighbours) {
            queue.erase({wd.second, std::min(a, nb), std::max(a, nb)});
            if (nb != b) comms[nb].neighbours.erase(a);
        }
        for (const auto& [nb, wd] : cb.neighbours) {
            queue.erase({wd.second, std::min(b, nb), std::max(b, nb)});
            if (nb != a) comms[nb].neighbours.erase(b);
        }
        const double w_ab = ca.neighbours.at(b).first;
        q += w_ab / m - 2.0 * ca.degree * cb.degree / (4.0 * m * m);

        Community merged;
        merged.size = ca.size + cb.size;
        merged.walk = combine(ca.walk, ca.size, cb.walk, cb.size);
        merged.internal = ca.internal + cb.internal + w_ab;
        merged.degree = ca.degree + cb.degree;
        std::map<std::uint32_t, double> weights;
        for (const auto& [nb, wd] : ca.neighbours)
            if (nb != b) weights[nb] += wd.first;
        for (const auto& [nb, wd] : cb.neighbours)
            if (nb != a) weights[nb] += wd.first;
        const std::uint32_t rep = std::min(a, b);
        for (const auto& [nb, w] : weights) {
            double d = delta_sigma(merged, comms[nb]);
            merged.neighbours[nb] = {w, d};
            comms[nb].neighbours[rep] = {w, d};
            queue.insert({d, std::min(rep, nb), std::max(rep, nb)});
        }
        comms.emplace(rep, std::move(merged));
        merges.emplace_back(a, b);
        q_after.push_back(q);
    }

    // Level 0 is the all-singletons state.
    double best_q = 0.0;
    for (auto v : nodes) {
        double d = static_cast<double>(g.out(v).size()) / (2.0 * m);
        best_q -= d * d;
    }
    std::size_t best_level = 0;
    for (std::size_t i = 0; i < q_after.size(); ++i) {
        if (q_after[i] > best_q + 1e-12) {
            best_q = q_after[i];
            best_level = i + 1;
        }
    }
    for (std::size_t i = 0; i < best_level; ++i) uf.unite(merges[i].first, merges[i].second);
}

}  // namespace

Partition detect_communities(const SimpleGraph& input, int walk_steps) {
    if (walk_steps < 1) throw Error("InvalidArgument", "walk_steps must be at least 1");
    const SimpleGraph g = input.directed() ? input.as_undirected() : input;
    const std::size_t n = g.size();
    if (n == 0) throw Error("EmptySnapshot", "community detection needs a non-empty snapshot");
    const double m = static_cast<double>(g.edges().size());

    std::vector<std::uint32_t> comp(n, UINT32_MAX);
    std::vector<std::vector<std::uint32_t>> components;
    for (std::uint32_t s = 0; s < n; ++s) {
        if (comp[s] != UINT32_MAX) continue;
        std::vector<std::uint32_t> nodes{s};
        comp[s] = static_cast<std::uint32_t>(components.size());
        for (std::size_t i = 0; i < nodes.size(); ++i)
            for (const auto& nb : g.out(nodes[i]))
                if (comp[nb.node] == UINT32_MAX) {
                    comp[nb.node] = comp[s];
                    nodes.push_back(nb.node);
                }
        std::sort(nodes.begin(), nodes.end());
        components.push_back(std::move(nodes));
    }

    Walker walker(g);
    UnionFind uf(n);
    for (const auto& nodes : components) cluster_component(g, nodes, walk_steps, m, walker, uf);

    std::vector<Label> labels(n, 0);
    std::unordered_map<std::uint32_t, Label> label_of_root;
    Label next = 1;
    for (std::uint32_t v = 0; v < n; ++v) {
        auto root = uf.find(v);
        auto [it, inserted] = label_of_root.emplace(root, next);
        if (inserted) ++next;
        labels[v] = it->second;
    }
    return Partition(g.ids(), std::move(labels));
}

double modularity(const SimpleGraph& input, const std::vector<Label>& labels) {
    const SimpleGraph g = input.directed() ? input.as_undirected() : input;
    const double m = static_cast<double>(g.edges().size());
    if (m == 0.0) return 0.0;
    std::map<Label, double> internal, degree;
    for (const auto& e : g.edges())
        if (labels[e.u] == labels[e.v]) internal[labels[e.u]] += 1.0;
    for (std::uint32_t v = 0; v < g.size(); ++v) degree[labels[v]] += static_cast<double>(g.out(v).size());
    double q = 0.0;
    for (const auto& [l, d] : degree) {
        double frac = d / (2.0 * m);
        q += internal[l] / m - frac * frac;
    }
    return q;
}

// ---- spanners and edits ---------------------------------------------------------------------

namespace {

const SimpleGraph& undirected_or_throw(const SimpleGraph& g) {
    if (g.directed()) throw Error("InvalidArgument", "community operations need an undirected view");
    return g;
}

void check_aligned(const Partition& p, const SimpleGraph& g) {
    if (p.ids().size() != g.size()) throw Error("InvalidArgument", "partition does not match graph");
}

}  // namespace

std::vector<Spanner> find_spanners(const Partition& p, const SimpleGraph& g) {
    undirected_or_throw(g);
    check_aligned(p, g);
    std::vector<Spanner> out;
    for (std::uint32_t v = 0; v < g.size(); ++v) {
        Spanner s{v, {}};
        for (const auto& nb : g.out(v))
            if (p.label(nb.node) != p.label(v)) s.foreign.insert(p.label(nb.node));
        if (!s.foreign.empty()) out.push_back(std::move(s));
    }
    return out;
}

Partition merge(const Partition& p, const SimpleGraph& g, Label a, Label b) {
    undirected_or_throw(g);
    check_aligned(p, g);
    if (!p.has(a)) throw Error("UnknownCommunity", "unknown community " + std::to_string(a));
    if (!p.has(b)) throw Error("UnknownCommunity", "unknown community " + std::to_string(b));
    if (a == b) throw Error("SameCommunity", "cannot merge a community with itself");
    bool adjacent = false;
    for (const auto& e : g.edges()) {
        Label lu = p.label(e.u), lv = p.label(e.v);
        if ((lu == a && lv == b) || (lu == b && lv == a)) {
            adjacent = true;
            break;
        }
    }
    if (!adjacent)
        throw Error("NotNeighbours",
                    "communities " + std::to_string(a) + " and " + std::to_string(b) + " share no edge");
    Partition next = p;
    for (auto& l : next.labels_)
        if (l == b) l = a;
    ++next.revision_;
    next.history_.push_back({EditOp::Kind::merge, a, b, {}, 0, 0, {}});
    return next;
}

Partition reassign(const Partition& p, const SimpleGraph& g, const std::string& node, Label target) {
    undirected_or_throw(g);
    check_aligned(p, g);
    auto v = g.find(node);
    if (!v) throw Error("UnknownNode", "unknown node '" + node + "'", node);
    if (!p.has(target)) throw Error("UnknownCommunity", "unknown community " + std::to_string(target));
    std::set<Label> foreign;
    for (const auto& nb : g.out(*v))
        if (p.label(nb.node) != p.label(*v)) foreign.insert(p.label(nb.node));
    if (foreign.empty()) throw Error("NotASpanner", "node '" + node + "' is not a structural-hole spanner", node);
    if (!foreign.count(target))
        throw Error("NotAdjacent", "node '" + node + "' has no neighbour in community " + std::to_string(target), node);
    Partition next = p;
    next.labels_[*v] = target;
    ++next.revision_;
    next.history_.push_back({EditOp::Kind::reassign, 0, 0, node, target, 0, {}});
    return next;
}

Partition split(const Partition& p, const SimpleGraph& g, Label community,
                const std::vector<std::pair<std::string, std::string>>& cut_edges) {
    undirected_or_throw(g);
    check_aligned(p, g);
    if (!p.has(community)) throw Error("UnknownCommunity", "unknown community " + std::to_string(community));
    std::set<std::pair<std::uint32_t, std::uint32_t>> cut;
    for (const auto& [a, b] : cut_edges) {
        auto u = g.find(a), v = g.find(b);
        if (!u || !v || !g.has_edge(*u, *v) || p.label(*u) != community || p.label(*v) != community)
            throw Error("UnknownEdge", "edge " + a + "-" + b + " is not inside community " + std::to_string(community));
        cut.insert({std::min(*u, *v), std::max(*u, *v)});
    }
    std::vector<std::uint32_t> members;
    for (std::uint32_t v = 0; v < g.size(); ++v)
        if (p.label(v) == community) members.push_back(v);
    std::vector<int> part(g.size(), -1);
    int parts = 0;
    for (auto s : members) {
        if (part[s] >= 0) continue;
        std::vector<std::uint32_t> stack{s};
        part[s] = parts;
        while (!stack.empty()) {
            auto v = stack.back();
            stack.pop_back();
            for (const auto& nb : g.out(v)) {
                auto w = nb.node;
                if (p.label(w) != community || part[w] >= 0) continue;
                if (cut.count({std::min(v, w), std::max(v, w)})) continue;
                part[w] = parts;
                stack.push_back(w);
            }
        }
        ++parts;
    }
    if (parts < 2) throw Error("NotACut", "removing the edges leaves community " + std::to_string(community) + " connected");
    Partition next = p;
    // Parts are numbered in order of their smallest member since members are scanned ascending.
    std::vector<Label> fresh(static_cast<std::size_t>(parts));
    for (auto& l : fresh) l = next.next_label_++;
    for (auto v : members) next.labels_[v] = fresh[static_cast<std::size_t>(part[v])];
    ++next.revision_;
    next.history_.push_back({EditOp::Kind::split, 0, 0, {}, 0, community, cut_edges});
    return next;
}

Partition apply_edit(const Partition& p, const SimpleGraph& g, const EditOp& op) {
    switch (op.kind) {
        case EditOp::Kind::merge: return merge(p, g, op.a, op.b);
        case EditOp::Kind::reassign: return reassign(p, g, op.node, op.target);
        case EditOp::Kind::split: return split(p, g, op.community, op.cut_edges);
    }
    throw Error("InvalidEdit", "unknown edit kind");
}

Partition replay(const Partition& initial, const SimpleGraph& g, const std::vector<EditOp>& log) {
    Partition p = initial;
    for (const auto& op : log) p = apply_edit(p, g, op);
    return p;
}

// ---- statistics --------------------------------------------------------------------------------

std::vector<graph::FirmFinancials> local_financials(const SimpleGraph& g,
                                                    const std::vector<graph::FirmFinancials>& by_network_index) {
    std::vector<graph::FirmFinancials> out;
    out.reserve(g.size());
    for (auto gi : g.global()) out.push_back(by_network_index.at(gi));
    if (out.size() != g.size()) throw Error("InvalidArgument", "graph carries no network indices");
    return out;
}

std::vector<CommunityStats> community_stats(const Partition& p, const SimpleGraph& g,
                                            const std::vector<graph::FirmFinancials>& financials) {
    undirected_or_throw(g);
    check_aligned(p, g);
    if (financials.size() != g.size()) throw Error("InvalidArgument", "financials do not match graph");
    std::map<Label, CommunityStats> stats;
    std::map<Label, std::set<Label>> neighbours;
    for (std::uint32_t v = 0; v < g.size(); ++v) {
        auto& s = stats[p.label(v)];
        s.label = p.label(v);
        ++s.firm_count;
        if (financials[v].defaulted) ++s.default_firm_count;
        s.total_loan_amount += financials[v].loan_amount;
        s.total_default_amount += financials[v].default_amount;
    }
    for (const auto& sp : find_spanners(p, g)) {
        ++stats[p.label(sp.node)].spanner_count;
        neighbours[p.label(sp.node)].insert(sp.foreign.begin(), sp.foreign.end());
    }
    std::vector<CommunityStats> out;
    for (auto& [l, s] : stats) {
        s.neighbour_count = static_cast<int>(neighbours[l].size());
        s.ratio_default_firms = static_cast<double>(s.default_firm_count) / s.firm_count;
        if (s.total_loan_amount > 0.0) s.ratio_default_amount = s.total_default_amount / s.total_loan_amount;
        out.push_back(s);
    }
    return out;
}

nlohmann::json to_json(const CommunityStats& s) {
    auto pct_firms = graph::percent_half_up(s.default_firm_count, s.firm_count);
    auto pct_amount = graph::percent_half_up(s.total_default_amount, s.total_loan_amount);
    return {{"community", s.label},
            {"firms", s.firm_count},
            {"defaults", s.default_firm_count},
            {"ratio_default_firms", s.ratio_default_firms},
            {"ratio_default_firms_pct", pct_firms ? nlohmann::json(*pct_firms) : nlohmann::json(nullptr)},
            {"ratio_default_amount", s.ratio_default_amount ? nlohmann::json(*s.ratio_default_amount) : nlohmann::json(nullptr)},
            {"ratio_default_amount_pct", pct_amount ? nlohmann::json(*pct_amount) : nlohmann::json(nullptr)},
            {"spanners", s.spanner_count},
            {"neighbour_communities", s.neighbour_count},
            {"total_loan_amount", s.total_loan_amount},
            {"total_default_amount", s.total_default_amount}};
}

// ---- treemap -------------------------------------------------------------------------------------

namespace {

struct Rect {
    double x, y, w, h;
};

double worst_ratio(const std::vector<double>& row, double side) {
    double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double a : row) {
        sum += a;
        lo = std::min(lo, a);
        hi = std::max(hi, a);
    }
    if (sum <= 0.0 || lo <= 0.0) return std::numeric_limits<double>::infinity();
    double s2 = side * side;
    return std::max(s2 * hi / (sum * sum), sum * sum / (s2 * lo));
}

}  // namespace

std::vector<TreemapRect> treemap_layout(const std::vector<CommunityStats>& stats) {
    std::vector<double> sizes;
    for (const auto& s : stats) sizes.push_back(s.ratio_default_firms);
    return treemap_layout(stats, sizes);
}

std::vector<TreemapRect> treemap_layout(const std::vector<CommunityStats>& stats, const std::vector<double>& sizes) {
    if (stats.empty()) throw Error("InvalidArgument", "treemap needs at least one community");
    if (sizes.size() != stats.size()) throw Error("InvalidArgument", "one size per community required");
    const double mean = std::accumulate(sizes.begin(), sizes.end(), 0.0) / static_cast<double>(sizes.size());
    const double floor = 0.02 * mean;
    std::vector<double> area(sizes.size());
    for (std::size_t i = 0; i < sizes.size(); ++i) area[i] = mean > 0.0 ? std::max(sizes[i], floor) : 1.0;
    const double total = std::accumulate(area.begin(), area.end(), 0.0);

    std::vector<std::size_t> order(stats.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (area[a] != area[b]) return area[a] > area[b];
        return stats[a].label < stats[b].label;
    });

    std::vector<TreemapRect> out(stats.size());
    Rect free{0.0, 0.0, 1.0, 1.0};
    std::vector<std::size_t> row;
    std::vector<double> row_areas;
    auto lay_row = [&] {
        double sum = std::accumulate(row_areas.begin(), row_areas.end(), 0.0);
        if (free.w >= free.h) {
            double width = sum / free.h;
            double y = free.y;
            for (std::size_t k = 0; k < row.size(); ++k) {
                double h = row_areas[k] / width;
                out[row[k]] = {stats[row[k]].label, free.x, y, width, h, 0, 0, {}};
                y += h;
            }
            free.x += width;
            free.w = std::max(0.0, free.w - width);
        } else {
            double height = sum / free.w;
            double x = free.x;
            for (std::size_t k = 0; k < row.size(); ++k) {
                double w = row_areas[k] / height;
                out[row[k]] = {stats[row[k]].label, x, free.y, w, height, 0, 0, {}};
                x += w;
            }
            free.y += height;
            free.h = std::max(0.0, free.h - height);
        }
        row.clear();
        row_areas.clear();
    };
    for (std::size_t idx : order) {
        double a = area[idx] / total;
        double side = std::min(free.w, free.h);
        std::vector<double> candidate = row_areas;
        candidate.push_back(a);
        if (!row.empty() && worst_ratio(candidate, side) > worst_ratio(row_areas, side)) lay_row();
        row.push_back(idx);
        row_areas.push_back(a);
    }
    if (!row.empty()) lay_row();

    for (std::size_t i = 0; i < stats.size(); ++i) {
        out[i].default_rate = stats[i].ratio_default_firms;
        out[i].size = area[i];
        auto pct = graph::percent_half_up(stats[i].default_firm_count, stats[i].firm_count).value_or(0);
        out[i].display = "C" + std::to_string(stats[i].label) + " " + std::to_string(pct) + "%";
    }
    return out;
}

// ---- radar -----------------------------------------------------------------------------------------

const char* radar_axis_name(int axis) {
    static const char* names[kRadarAxes] = {"Defaults", "LA/RC", "Deposit loss", "Sector concentration", "GA/RC",
                                            "Credit rating"};
    return (axis >= 0 && axis < kRadarAxes) ? names[axis] : "unknown";
}

std::vector<RadarProfile> radar_profiles(const Partition& p, const SimpleGraph& g, const graph::GuaranteeNetwork& net,
                                         const graph::Snapshot& snap,
                                         const std::vector<graph::FirmFinancials>& financials) {
    undirected_or_throw(g);
    check_aligned(p, g);
    if (g.global().size() != g.size()) throw Error("InvalidArgument", "graph carries no network indices");
    if (financials.size() != g.size()) throw Error("InvalidArgument", "financials do not match graph");
    const Date as_of = snap.as_of;
    const Date cutoff = add_days(as_of, 1);
    const Date year_ago = add_months(cutoff, -12);

    auto deposit_at = [](const graph::Enterprise& e, Date before) -> std::optional<double> {
        std::optional<double> v;
        for (const auto& d : e.deposits) {
            if (d.as_of >= before) break;
            v = d.balance;
        }
        return v;
    };

    std::vector<RadarProfile> out;
    for (const auto& [label, members] : p.members()) {
        RadarProfile r;
        r.label = label;
        double capital = 0.0, loans = 0.0, guarantees = 0.0, dep_now = 0.0, dep_then = 0.0, rating_sum = 0.0;
        int defaults = 0, rated = 0;
        std::map<std::string, int> sectors;
        int with_sector = 0;
        for (auto v : members) {
            const auto gi = g.global()[v];
            const auto& e = net.enterprise(gi);
            if (financials[v].defaulted) ++defaults;
            loans += financials[v].loan_amount;
            if (const auto* prof = e.profile_before(cutoff)) {
                capital += prof->registered_capital;
                ++sectors[prof->sector];
                ++with_sector;
            } else {
                r.warnings.push_back("MissingFinancials(" + e.id + "): no profile");
            }
            for (auto ei : net.edges_as_guarantor(gi))
                if (net.edges()[ei].active_at(as_of)) guarantees += net.edges()[ei].amount;
            auto now = deposit_at(e, cutoff), then = deposit_at(e, year_ago);
            if (now && then) {
                dep_now += *now;
                dep_then += *then;
            } else {
                r.warnings.push_back("MissingFinancials(" + e.id + "): no deposit history");
            }
            if (auto rating = e.rating_before(cutoff)) {
                rating_sum += *rating;
                ++rated;
            } else {
                r.warnings.push_back("MissingFinancials(" + e.id + "): no credit rating");
            }
        }
        r.raw[kDefaults] = static_cast<double>(defaults) / static_cast<double>(members.size());
        r.raw[kLoanToCapital] = capital > 0.0 ? loans / capital : 0.0;
        r.raw[kDepositLoss] = dep_then > 0.0 ? std::max(0.0, (dep_then - dep_now) / dep_then) : 0.0;
        int dominant = 0;
        for (const auto& [s, c] : sectors) dominant = std::max(dominant, c);
        r.raw[kSectorConcentration] = with_sector > 0 ? static_cast<double>(dominant) / with_sector : 0.0;
        r.raw[kGuaranteeToCapital] = capital > 0.0 ? guarantees / capital : 0.0;
        r.raw[kCreditRating] = rated > 0 ? rating_sum / rated : 0.0;
        out.push_back(std::move(r));
    }
    for (int axis = 0; axis < kRadarAxes; ++axis) {
        double mx = 0.0;
        for (const auto& r : out) mx = std::max(mx, r.raw[static_cast<std::size_t>(axis)]);
        for (auto& r : out)
            r.normalized[static_cast<std::size_t>(axis)] = mx > 0.0 ? r.raw[static_cast<std::size_t>(axis)] / mx : 0.0;
    }
    return out;
}

RadarProfile radar_profile(Label community, const Partition& p, const SimpleGraph& g,
                           const graph::GuaranteeNetwork& net, const graph::Snapshot& snap,
                           const std::vector<graph::FirmFinancials>& financials) {
    if (!p.has(community)) throw Error("UnknownCommunity", "unknown community " + std::to_string(community));
    for (auto& r : radar_profiles(p, g, net, snap, financials))
        if (r.label == community) return r;
    throw Error("UnknownCommunity", "unknown community " + std::to_string(community));
}

nlohmann::json to_json(const RadarProfile& r) {
    nlohmann::json axes = nlohmann::json::array();
    for (int a = 0; a < kRadarAxes; ++a)
        axes.push_back({{"axis", radar_axis_name(a)},
                        {"raw", r.raw[static_cast<std::size_t>(a)]},
                        {"normalized", r.normalized[static_cast<std::size_t>(a)]}});
    return {{"community", r.label}, {"axes", axes}, {"warnings", r.warnings}};
}

}  // namespace glens::community
