#include "glens/contagion.hpp"

#include <algorithm>
#include <map>

#include "glens/error.hpp"
#include "glens/hash.hpp"

namespace glens::contagion {

namespace {

std::uint32_t resolve_node(const SimpleGraph& g, const std::string& id) {
    if (!g.directed()) throw Error("InvalidArgument", "propagation analysis needs a directed view");
    auto v = g.find(id);
    if (!v) throw Error("UnknownNode", "unknown node '" + id + "'", id);
    return *v;
}

bool cut(const EdgeSet* removed, std::uint32_t guarantor, std::uint32_t borrower) {
    return removed && removed->count({guarantor, borrower});
}

void normalize(const std::vector<std::int64_t>& occ, std::vector<double>& out) {
    std::int64_t mx = 0;
    for (auto o : occ) mx = std::max(mx, o);
    out.assign(occ.size(), 0.0);
    if (mx == 0) return;
    for (std::size_t i = 0; i < occ.size(); ++i) out[i] = static_cast<double>(occ[i]) / static_cast<double>(mx);
}

// Fills paths and the truncated flag; occurrence is left to the caller.
void walk_paths(const SimpleGraph& g, std::uint32_t seed, const PathCaps& caps, const EdgeSet* removed,
                PropagationResult& r) {
    if (caps.max_len < 1) throw Error("InvalidArgument", "max_len must be at least 1");
    std::vector<char> on_path(g.size(), 0);
    std::vector<std::uint32_t> path{seed};
    on_path[seed] = 1;
    bool stop = false;
    auto emit = [&] {
        if (static_cast<std::int64_t>(r.paths.size()) >= caps.max_paths) {
            r.truncated = true;
            stop = true;
            return;
        }
        r.paths.push_back(path);
    };
    auto extend = [&](auto&& self, std::uint32_t v) -> void {
        bool any = false;
        const bool at_cap = static_cast<int>(path.size()) - 1 >= caps.max_len;
        for (const auto& nb : g.in(v)) {
            if (stop) return;
            std::uint32_t w = nb.node;
            if (on_path[w] || cut(removed, w, v)) continue;
            any = true;
            if (at_cap) break;
            on_path[w] = 1;
            path.push_back(w);
            self(self, w);
            path.pop_back();
            on_path[w] = 0;
        }
        if (stop) return;
        if (at_cap && any) r.truncated = true;
        if ((at_cap || !any) && path.size() >= 2) emit();
    };
    extend(extend, seed);
}

}  // namespace

std::vector<std::uint32_t> contagion_set(const SimpleGraph& g, const std::string& seed, const EdgeSet* removed) {
    const std::uint32_t s = resolve_node(g, seed);
    std::vector<char> seen(g.size(), 0);
    std::vector<std::uint32_t> queue{s};
    seen[s] = 1;
    for (std::size_t i = 0; i < queue.size(); ++i) {
        std::uint32_t v = queue[i];
        for (const auto& nb : g.in(v)) {
            if (seen[nb.node] || cut(removed, nb.node, v)) continue;
            seen[nb.node] = 1;
            queue.push_back(nb.node);
        }
    }
    std::vector<std::uint32_t> out(queue.begin() + 1, queue.end());
    std::sort(out.begin(), out.end());
    return out;
}

PropagationResult enumerate_paths(const SimpleGraph& g, const std::string& seed, const PathCaps& caps,
                                  const EdgeSet* removed) {
    PropagationResult r;
    r.seed = resolve_node(g, seed);
    walk_paths(g, r.seed, caps, removed, r);
    r.occurrence.assign(g.size(), 0);
    for (const auto& p : r.paths)
        for (auto v : p) ++r.occurrence[v];
    normalize(r.occurrence, r.importance);
    return r;
}

ImportanceResult propagation_importance(const SimpleGraph& g, const PathCaps& caps, const EdgeSet* removed,
                                        const JobControl& job) {
    if (!g.directed()) throw Error("InvalidArgument", "propagation analysis needs a directed view");
    ImportanceResult out;
    out.occurrence.assign(g.size(), 0);
    const std::uint32_t n = static_cast<std::uint32_t>(g.size());
    for (std::uint32_t s = 0; s < n; ++s) {
        if (job.cancelled()) {
            out.cancelled = true;
            break;
        }
        PropagationResult r;
        r.seed = s;
        walk_paths(g, s, caps, removed, r);
        out.truncated = out.truncated || r.truncated;
        for (const auto& p : r.paths)
            for (auto v : p) ++out.occurrence[v];
        if (s % 64 == 0 || s + 1 == n) job.report(static_cast<double>(s + 1) / n);
    }
    normalize(out.occurrence, out.importance);
    return out;
}

SankeyFlow sankey_flow(const SimpleGraph& g, const std::string& focus, const PathCaps& caps, const EdgeSet* removed) {
    auto r = enumerate_paths(g, focus, caps, removed);
    SankeyFlow s;
    s.focus = r.seed;
    s.truncated = r.truncated;
    std::set<std::uint32_t> nodes{r.seed};
    std::set<std::pair<std::uint32_t, std::uint32_t>> used;
    for (const auto& p : r.paths)
        for (std::size_t i = 0; i + 1 < p.size(); ++i) {
            nodes.insert(p[i + 1]);
            used.insert({p[i + 1], p[i]});
        }
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> weight;
    for (const auto& e : g.edges()) weight[{e.u, e.v}] = e.weight;
    for (auto v : nodes) {
        SankeyNode sn{v, 0.0, 0.0};
        for (const auto& nb : g.out(v))
            if (!cut(removed, v, nb.node)) sn.given += nb.weight;
        for (const auto& nb : g.in(v))
            if (!cut(removed, nb.node, v)) sn.received += nb.weight;
        s.nodes.push_back(sn);
    }
    for (auto [u, v] : used) s.links.push_back({u, v, weight.at({u, v})});
    return s;
}

CutSession::CutSession(SimpleGraph directed) : graph_(std::move(directed)) {
    if (!graph_.directed()) throw Error("InvalidArgument", "propagation analysis needs a directed view");
}

std::pair<std::uint32_t, std::uint32_t> CutSession::resolve(const std::string& guarantor,
                                                            const std::string& borrower) const {
    auto u = graph_.find(guarantor), v = graph_.find(borrower);
    if (!u || !v || !graph_.has_edge(*u, *v))
        throw Error("UnknownEdge", "no guarantee edge " + guarantor + " -> " + borrower + " in this view",
                    guarantor + "->" + borrower);
    return {*u, *v};
}

void CutSession::apply_cut(const std::string& guarantor, const std::string& borrower) {
    cuts_.insert(resolve(guarantor, borrower));
}

void CutSession::revert_cut(const std::string& guarantor, const std::string& borrower) {
    cuts_.erase(resolve(guarantor, borrower));
}

PropagationResult CutSession::paths(const std::string& seed, const PathCaps& caps) const {
    return enumerate_paths(graph_, seed, caps, &cuts_);
}

SankeyFlow CutSession::sankey(const std::string& focus, const PathCaps& caps) const {
    return sankey_flow(graph_, focus, caps, &cuts_);
}

std::string CutSession::fingerprint() const {
    Fingerprint fp;
    for (auto [u, v] : cuts_) fp.add(graph_.id(u)).add(graph_.id(v));
    return fp.hex();
}

std::string fingerprint(const PropagationResult& r, const SimpleGraph& g) {
    Fingerprint fp;
    fp.add(g.id(r.seed)).add(std::int64_t{r.truncated});
    for (const auto& p : r.paths) {
        for (auto v : p) fp.add(g.id(v));
        fp.add(std::string_view{"|"});
    }
    return fp.hex();
}

nlohmann::json to_json(const PropagationResult& r, const SimpleGraph& g) {
    nlohmann::json paths = nlohmann::json::array();
    for (const auto& p : r.paths) {
        nlohmann::json ids = nlohmann::json::array();
        for (auto v : p) ids.push_back(g.id(v));
        paths.push_back(ids);
    }
    nlohmann::json occ = nlohmann::json::object(), imp = nlohmann::json::object();
    for (std::uint32_t v = 0; v < r.occurrence.size(); ++v) {
        if (r.occurrence[v] == 0) continue;
        occ[g.id(v)] = r.occurrence[v];
        imp[g.id(v)] = r.importance[v];
    }
    return {{"seed", g.id(r.seed)},
            {"paths", paths},
            {"truncated", r.truncated},
            {"occurrence", occ},
            {"importance", imp},
            {"fingerprint", fingerprint(r, g)}};
}

nlohmann::json to_json(const ImportanceResult& r, const SimpleGraph& g) {
    nlohmann::json occ = nlohmann::json::object(), imp = nlohmann::json::object();
    for (std::uint32_t v = 0; v < r.occurrence.size(); ++v) {
        if (r.occurrence[v] == 0) continue;
        occ[g.id(v)] = r.occurrence[v];
        imp[g.id(v)] = r.importance[v];
    }
    return {{"occurrence", occ}, {"importance", imp}, {"truncated", r.truncated}, {"cancelled", r.cancelled}};
}

nlohmann::json to_json(const SankeyFlow& s, const SimpleGraph& g) {
    nlohmann::json nodes = nlohmann::json::array(), links = nlohmann::json::array();
    for (const auto& n : s.nodes)
        nodes.push_back({{"id", g.id(n.node)}, {"given", n.given}, {"received", n.received}});
    for (const auto& l : s.links)
        links.push_back({{"source", g.id(l.guarantor)}, {"target", g.id(l.borrower)}, {"value", l.value}});
    return {{"focus", g.id(s.focus)}, {"nodes", nodes}, {"links", links}, {"truncated", s.truncated}};
}

std::string paths_to_csv(const PropagationResult& r, const SimpleGraph& g) {
    std::string out = "path,step,guarantor,borrower\n";
    for (std::size_t i = 0; i < r.paths.size(); ++i) {
        const auto& p = r.paths[i];
        for (std::size_t s = 0; s + 1 < p.size(); ++s)
            out += std::to_string(i + 1) + "," + std::to_string(s + 1) + "," + g.id(p[s + 1]) + "," + g.id(p[s]) + "\n";
    }
    return out;
}

}  // namespace glens::contagion
