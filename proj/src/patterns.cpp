#include "glens/patterns.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "glens/error.hpp"

namespace glens::patterns {

namespace {

void require_directed(const SimpleGraph& g) {
    if (!g.directed()) throw Error("InvalidArgument", "pattern analysis needs a directed view");
}

// Runs fn(root, worker) for every root, spread over worker threads. Stops early when
// `stop` is raised or the job is cancelled. Progress is the fraction of roots finished.
template <class Fn>
void for_each_root(std::size_t n, unsigned threads, const JobControl& job, std::atomic<bool>& stop, Fn&& fn) {
    std::atomic<std::size_t> next{0}, done{0};
    const std::size_t step = std::max<std::size_t>(1, n / 100);
    auto worker = [&](unsigned w) {
        for (;;) {
            if (stop.load(std::memory_order_relaxed) || job.cancelled()) return;
            std::size_t r = next.fetch_add(1);
            if (r >= n) return;
            fn(static_cast<std::uint32_t>(r), w);
            std::size_t d = done.fetch_add(1) + 1;
            if (d % step == 0 || d == n) job.report(static_cast<double>(d) / static_cast<double>(n));
        }
    };
    if (threads <= 1) {
        worker(0);
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
}

unsigned pick_threads(unsigned requested, std::size_t roots) {
    unsigned t = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(1, roots)));
}

}  // namespace

// ---- circles ------------------------------------------------------------------------------

std::string_view to_string(CircleKind kind) {
    switch (kind) {
        case CircleKind::mutual: return "mutual";
        case CircleKind::revolving: return "revolving";
        case CircleKind::star: return "star";
        case CircleKind::joint_liability: return "joint_liability";
    }
    return "unknown";
}

std::vector<std::vector<std::uint32_t>> simple_cycles(const SimpleGraph& g, int max_len, std::int64_t max_cycles,
                                                      bool* exhausted, const JobControl& job) {
    require_directed(g);
    if (max_len < 2) throw Error("InvalidArgument", "maximum cycle length must be at least 2");
    const std::uint32_t n = static_cast<std::uint32_t>(g.size());
    std::vector<std::vector<std::uint32_t>> cycles;
    std::vector<int> dist(n, -1);
    std::vector<char> on_path(n, 0);
    std::vector<std::uint32_t> path, touched;
    bool full = false;
    if (exhausted) *exhausted = false;

    std::uint32_t s = 0;
    // Depth-first extension of `path`; `dist` bounds how far each node is from closing the cycle.
    auto dfs = [&](auto&& self, std::uint32_t v) -> void {
        for (const auto& nb : g.out(v)) {
            if (full) return;
            std::uint32_t w = nb.node;
            if (w == s) {
                if (path.size() >= 2) {
                    cycles.push_back(path);
                    if (static_cast<std::int64_t>(cycles.size()) >= max_cycles) full = true;
                }
                continue;
            }
            if (w < s || on_path[w] || dist[w] < 0) continue;
            if (static_cast<int>(path.size()) + dist[w] > max_len) continue;
            on_path[w] = 1;
            path.push_back(w);
            self(self, w);
            path.pop_back();
            on_path[w] = 0;
        }
    };

    for (s = 0; s < n && !full; ++s) {
        if (job.cancelled()) break;
        // Reverse breadth-first distances to s through nodes above s.
        touched.assign(1, s);
        dist[s] = 0;
        for (std::size_t i = 0; i < touched.size(); ++i) {
            std::uint32_t x = touched[i];
            if (dist[x] >= max_len - 1) continue;
            for (const auto& p : g.in(x)) {
                if (p.node > s && dist[p.node] < 0) {
                    dist[p.node] = dist[x] + 1;
                    touched.push_back(p.node);
                }
            }
        }
        path.assign(1, s);
        on_path[s] = 1;
        dfs(dfs, s);
        on_path[s] = 0;
        for (auto x : touched) dist[x] = -1;
        if (n > 0 && s % 256 == 0) job.report(static_cast<double>(s) / n);
    }
    if (exhausted) *exhausted = full;
    return cycles;
}

CircleReport detect_circles(const SimpleGraph& g, const CircleOptions& opts, const JobControl& job) {
    require_directed(g);
    if (opts.max_cycle_len < 2) throw Error("InvalidArgument", "maximum cycle length must be at least 2");
    CircleReport r;
    bool exhausted = false;
    for (auto& cycle : simple_cycles(g, opts.max_cycle_len, opts.max_cycles, &exhausted, job)) {
        GuaranteeCircle c;
        c.kind = cycle.size() == 2 ? CircleKind::mutual : CircleKind::revolving;
        for (std::size_t i = 0; i < cycle.size(); ++i) c.edges.emplace_back(cycle[i], cycle[(i + 1) % cycle.size()]);
        c.members = std::move(cycle);
        (c.kind == CircleKind::mutual ? r.mutual : r.revolving).push_back(std::move(c));
    }
    for (std::uint32_t v = 0; v < g.size(); ++v) {
        if (static_cast<int>(g.out(v).size()) >= opts.star_min_borrowers) {
            GuaranteeCircle c{CircleKind::star, {v}, {}};
            for (const auto& nb : g.out(v)) {
                c.members.push_back(nb.node);
                c.edges.emplace_back(v, nb.node);
            }
            r.star.push_back(std::move(c));
        }
        if (static_cast<int>(g.in(v).size()) >= opts.joint_min_guarantors) {
            GuaranteeCircle c{CircleKind::joint_liability, {v}, {}};
            for (const auto& nb : g.in(v)) {
                c.members.push_back(nb.node);
                c.edges.emplace_back(nb.node, v);
            }
            r.joint_liability.push_back(std::move(c));
        }
    }
    if (job.cancelled()) {
        r.partial = true;
        r.partial_reason = "Cancelled";
    } else if (exhausted) {
        r.partial = true;
        r.partial_reason = "CycleBudgetExceeded";
    }
    return r;
}

nlohmann::json to_json(const CircleReport& r, const SimpleGraph& g) {
    auto list = [&](const std::vector<GuaranteeCircle>& circles) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& c : circles) {
            nlohmann::json members = nlohmann::json::array(), edges = nlohmann::json::array();
            for (auto v : c.members) members.push_back(g.id(v));
            for (auto [u, v] : c.edges) edges.push_back({g.id(u), g.id(v)});
            out.push_back({{"kind", to_string(c.kind)}, {"members", members}, {"edges", edges}});
        }
        return out;
    };
    nlohmann::json j{{"mutual", list(r.mutual)},
                     {"revolving", list(r.revolving)},
                     {"star", list(r.star)},
                     {"joint_liability", list(r.joint_liability)},
                     {"counts",
                      {{"mutual", r.mutual.size()},
                       {"revolving", r.revolving.size()},
                       {"star", r.star.size()},
                       {"joint_liability", r.joint_liability.size()}}},
                     {"partial", r.partial}};
    if (r.partial) j["partial_reason"] = r.partial_reason;
    return j;
}

// ---- canonical codes -------------------------------------------------------------------------

namespace {

struct PermTable {
    int k = 0;
    std::vector<std::array<int, kMaxMotifSize>> perms;
    std::vector<std::array<std::uint8_t, kMaxMotifSize*(kMaxMotifSize - 1)>> bit_map;
    std::array<std::pair<int, int>, kMaxMotifSize*(kMaxMotifSize - 1)> pair_of{};
};

const PermTable& perm_table(int k) {
    static const std::array<PermTable, kMaxMotifSize + 1> tables = [] {
        std::array<PermTable, kMaxMotifSize + 1> t;
        for (int k = 1; k <= kMaxMotifSize; ++k) {
            auto& tab = t[static_cast<std::size_t>(k)];
            tab.k = k;
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j)
                    if (i != j) tab.pair_of[static_cast<std::size_t>(code_bit(k, i, j))] = {i, j};
            std::array<int, kMaxMotifSize> p{};
            std::iota(p.begin(), p.begin() + k, 0);
            do {
                tab.perms.push_back(p);
                std::array<std::uint8_t, kMaxMotifSize*(kMaxMotifSize - 1)> m{};
                for (int b = 0; b < k * (k - 1); ++b) {
                    auto [u, v] = tab.pair_of[static_cast<std::size_t>(b)];
                    m[static_cast<std::size_t>(b)] = static_cast<std::uint8_t>(
                        code_bit(k, p[static_cast<std::size_t>(u)], p[static_cast<std::size_t>(v)]));
                }
                tab.bit_map.push_back(m);
            } while (std::next_permutation(p.begin(), p.begin() + k));
        }
        return t;
    }();
    return tables[static_cast<std::size_t>(k)];
}

inline std::uint32_t permute(const PermTable& t, std::size_t perm, std::uint32_t raw) {
    std::uint32_t out = 0;
    const auto& m = t.bit_map[perm];
    while (raw) {
        int b = __builtin_ctz(raw);
        raw &= raw - 1;
        out |= 1u << m[static_cast<std::size_t>(b)];
    }
    return out;
}

// Index of the permutation producing the minimal code.
std::size_t best_permutation(int k, std::uint32_t raw, std::uint32_t* best_code) {
    const auto& t = perm_table(k);
    std::size_t best = 0;
    std::uint32_t code = permute(t, 0, raw);
    for (std::size_t i = 1; i < t.perms.size(); ++i) {
        std::uint32_t c = permute(t, i, raw);
        if (c < code) {
            code = c;
            best = i;
        }
    }
    if (best_code) *best_code = code;
    return best;
}

bool is_canonical(int k, std::uint32_t raw) {
    const auto& t = perm_table(k);
    for (std::size_t i = 1; i < t.perms.size(); ++i)
        if (permute(t, i, raw) < raw) return false;
    return true;
}

void check_size(int k) {
    if (k < 2 || k > kMaxMotifSize)
        throw Error("InvalidMotif", "motif size must be between 2 and " + std::to_string(kMaxMotifSize));
}

}  // namespace

int code_bit(int k, int from, int to) { return from * (k - 1) + (to < from ? to : to - 1); }

std::uint32_t canonical_code(int k, std::uint32_t raw) {
    check_size(k);
    std::uint32_t code = 0;
    best_permutation(k, raw, &code);
    return code;
}

bool weakly_connected(int k, std::uint32_t raw) {
    std::array<std::uint32_t, kMaxMotifSize> nbr{};
    const auto& t = perm_table(k);
    while (raw) {
        int b = __builtin_ctz(raw);
        raw &= raw - 1;
        auto [u, v] = t.pair_of[static_cast<std::size_t>(b)];
        nbr[static_cast<std::size_t>(u)] |= 1u << v;
        nbr[static_cast<std::size_t>(v)] |= 1u << u;
    }
    std::uint32_t seen = 1, frontier = 1;
    while (frontier) {
        std::uint32_t next = 0;
        for (int v = 0; v < k; ++v)
            if (frontier & (1u << v)) next |= nbr[static_cast<std::size_t>(v)];
        frontier = next & ~seen;
        seen |= next;
    }
    return seen == (1u << k) - 1;
}

Motif Motif::from_edges(int k, const std::vector<std::pair<int, int>>& edges, std::vector<int>* slot_map) {
    check_size(k);
    std::uint32_t raw = 0;
    for (auto [u, v] : edges) {
        if (u < 0 || v < 0 || u >= k || v >= k) throw Error("InvalidMotif", "motif edge slot out of range");
        if (u == v) throw Error("InvalidMotif", "motif edges may not be self-loops");
        raw |= 1u << code_bit(k, u, v);
    }
    if (!weakly_connected(k, raw)) throw Error("InvalidMotif", "motif must be weakly connected");
    Motif m;
    m.k_ = k;
    std::size_t perm = best_permutation(k, raw, &m.code_);
    if (slot_map) {
        const auto& p = perm_table(k).perms[perm];
        slot_map->assign(p.begin(), p.begin() + k);
    }
    return m;
}

std::string Motif::code_string() const {
    const int digits = std::max(1, (k_ * (k_ - 1) + 3) / 4);
    char buf[32];
    std::snprintf(buf, sizeof buf, "k%d-%0*x", k_, digits, code_);
    return buf;
}

std::vector<std::pair<int, int>> Motif::edges() const {
    std::vector<std::pair<int, int>> out;
    for (int u = 0; u < k_; ++u)
        for (int v = 0; v < k_; ++v)
            if (u != v && has_edge(u, v)) out.emplace_back(u, v);
    return out;
}

bool Motif::has_edge(int from, int to) const {
    if (from == to || from < 0 || to < 0 || from >= k_ || to >= k_) return false;
    return (code_ >> code_bit(k_, from, to)) & 1u;
}

int Motif::out_degree(int slot) const {
    int d = 0;
    for (int v = 0; v < k_; ++v) d += has_edge(slot, v);
    return d;
}

int Motif::in_degree(int slot) const {
    int d = 0;
    for (int u = 0; u < k_; ++u) d += has_edge(u, slot);
    return d;
}

std::vector<Motif> enumerate_motif_classes(int k) {
    if (k < 3 || k > 5) throw Error("InvalidArgument", "motif classes are enumerated for 3 to 5 nodes");
    std::vector<Motif> out;
    const std::uint32_t limit = 1u << (k * (k - 1));
    for (std::uint32_t raw = 0; raw < limit; ++raw) {
        if (!weakly_connected(k, raw) || !is_canonical(k, raw)) continue;
        out.push_back(Motif::from_edges(k, [&] {
            std::vector<std::pair<int, int>> e;
            const auto& t = perm_table(k);
            for (int b = 0; b < k * (k - 1); ++b)
                if (raw & (1u << b)) e.push_back(t.pair_of[static_cast<std::size_t>(b)]);
            return e;
        }()));
    }
    return out;
}

nlohmann::json to_json(const Motif& m) {
    nlohmann::json adjacency = nlohmann::json::array();
    for (int u = 0; u < m.k(); ++u) {
        nlohmann::json row = nlohmann::json::array();
        for (int v = 0; v < m.k(); ++v)
            if (m.has_edge(u, v)) row.push_back(v);
        adjacency.push_back(row);
    }
    return {{"k", m.k()}, {"code", m.code_string()}, {"adjacency", adjacency}};
}

Motif motif_from_json(const nlohmann::json& j) {
    try {
        std::vector<std::pair<int, int>> edges;
        int k = 0;
        if (j.contains("adjacency")) {
            const auto& adj = j.at("adjacency");
            k = static_cast<int>(adj.size());
            for (int u = 0; u < k; ++u)
                for (const auto& v : adj.at(static_cast<std::size_t>(u))) edges.emplace_back(u, v.get<int>());
        } else {
            k = j.at("k").get<int>();
            for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
        }
        return Motif::from_edges(k, edges);
    } catch (const nlohmann::json::exception& e) {
        throw Error("InvalidMotif", std::string("malformed motif: ") + e.what());
    }
}

// ---- census ----------------------------------------------------------------------------------------

CensusResult motif_census(const SimpleGraph& g, int k, const CensusOptions& opts, const JobControl& job) {
    require_directed(g);
    if (k < 3 || k > 5) throw Error("InvalidArgument", "census motif size must be between 3 and 5");
    const SimpleGraph und = g.as_undirected();
    const std::uint32_t n = static_cast<std::uint32_t>(g.size());
    const unsigned threads = pick_threads(0, n);

    struct Worker {
        std::vector<std::uint32_t> canon;  // raw code -> canonical code, lazily filled
        std::map<std::uint32_t, std::int64_t> counts;
        std::int64_t visited = 0;
    };
    std::vector<Worker> workers(threads);
    for (auto& w : workers) w.canon.assign(std::size_t{1} << (k * (k - 1)), UINT32_MAX);
    std::atomic<std::int64_t> total{0};
    std::atomic<bool> stop{false};

    auto raw_code = [&](const std::vector<std::uint32_t>& nodes) {
        std::uint32_t raw = 0;
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                if (i != j && g.has_edge(nodes[static_cast<std::size_t>(i)], nodes[static_cast<std::size_t>(j)]))
                    raw |= 1u << code_bit(k, i, j);
        return raw;
    };
    auto excluded = [&](std::uint32_t u, const std::vector<std::uint32_t>& sub) {
        for (auto s : sub)
            if (s == u || und.has_edge(s, u)) return true;
        return false;
    };

    for_each_root(n, threads, job, stop, [&](std::uint32_t v, unsigned wi) {
        Worker& w = workers[wi];
        std::vector<std::uint32_t> sub{v};
        // Enumerates each connected k-set whose smallest node is v exactly once.
        auto extend = [&](auto&& self, std::vector<std::uint32_t> ext) -> void {
            if (static_cast<int>(sub.size()) == k) {
                std::uint32_t raw = raw_code(sub);
                auto& c = w.canon[raw];
                if (c == UINT32_MAX) c = canonical_code(k, raw);
                ++w.counts[c];
                ++w.visited;
                if (total.fetch_add(1) + 1 >= opts.max_subgraphs) stop = true;
                return;
            }
            while (!ext.empty() && !stop.load(std::memory_order_relaxed)) {
                std::uint32_t x = ext.back();
                ext.pop_back();
                std::vector<std::uint32_t> next = ext;
                for (const auto& nb : und.out(x))
                    if (nb.node > v && !excluded(nb.node, sub)) next.push_back(nb.node);
                sub.push_back(x);
                self(self, std::move(next));
                sub.pop_back();
            }
        };
        std::vector<std::uint32_t> ext;
        for (const auto& nb : und.out(v))
            if (nb.node > v) ext.push_back(nb.node);
        extend(extend, std::move(ext));
    });

    CensusResult r;
    r.k = k;
    std::map<std::uint32_t, std::int64_t> merged;
    for (const auto& w : workers) {
        r.subgraphs += w.visited;
        for (const auto& [c, cnt] : w.counts) merged[c] += cnt;
    }
    for (const auto& [code, cnt] : merged) {
        std::vector<std::pair<int, int>> e;
        const auto& t = perm_table(k);
        for (int b = 0; b < k * (k - 1); ++b)
            if (code & (1u << b)) e.push_back(t.pair_of[static_cast<std::size_t>(b)]);
        r.classes.push_back({Motif::from_edges(k, e), cnt});
    }
    std::stable_sort(r.classes.begin(), r.classes.end(),
                     [](const CensusEntry& a, const CensusEntry& b) { return a.count > b.count; });
    if (job.cancelled()) {
        r.partial = true;
        r.partial_reason = "Cancelled";
    } else if (stop) {
        r.partial = true;
        r.partial_reason = "CensusBudgetExceeded";
    }
    return r;
}

nlohmann::json to_json(const CensusResult& r) {
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& c : r.classes) {
        auto j = to_json(c.motif);
        j["count"] = c.count;
        classes.push_back(j);
    }
    nlohmann::json j{{"k", r.k}, {"classes", classes}, {"subgraphs", r.subgraphs}, {"partial", r.partial}};
    if (r.partial) j["partial_reason"] = r.partial_reason;
    return j;
}

// ---- matching ----------------------------------------------------------------------------------------

MatchResult match_motif(const SimpleGraph& g, const Motif& motif, const MatchOptions& opts, const JobControl& job) {
    require_directed(g);
    const int k = motif.k();
    if (k < 2) throw Error("InvalidMotif", "motif has no slots");
    MatchResult result;
    result.motif = motif;
    if (g.size() < static_cast<std::size_t>(k)) return result;
    const SimpleGraph und = g.as_undirected();

    // Slot visiting order: each slot after the first touches an earlier one.
    std::vector<int> order;
    std::vector<char> placed(static_cast<std::size_t>(k), 0);
    auto degree = [&](int s) { return motif.out_degree(s) + motif.in_degree(s); };
    auto linked = [&](int a, int b) { return motif.has_edge(a, b) || motif.has_edge(b, a); };
    for (int step = 0; step < k; ++step) {
        int best = -1, best_links = -1;
        for (int s = 0; s < k; ++s) {
            if (placed[static_cast<std::size_t>(s)]) continue;
            int links = 0;
            for (int p : order) links += linked(s, p);
            if (step > 0 && links == 0) continue;
            if (links > best_links || (links == best_links && degree(s) > degree(best))) {
                best = s;
                best_links = links;
            }
        }
        order.push_back(best);
        placed[static_cast<std::size_t>(best)] = 1;
    }
    std::vector<int> anchor(static_cast<std::size_t>(k), -1);  // position of an earlier linked slot
    for (int i = 1; i < k; ++i)
        for (int j = 0; j < i && anchor[static_cast<std::size_t>(i)] < 0; ++j)
            if (linked(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]))
                anchor[static_cast<std::size_t>(i)] = j;

    const std::uint32_t n = static_cast<std::uint32_t>(g.size());
    const unsigned threads = pick_threads(opts.threads, n);
    std::vector<std::set<std::vector<std::uint32_t>>> found(threads);
    std::atomic<std::int64_t> total{0};
    std::atomic<bool> stop{false};

    for_each_root(n, threads, job, stop, [&](std::uint32_t root, unsigned wi) {
        auto& sets = found[wi];
        std::vector<std::uint32_t> image(static_cast<std::size_t>(k));
        auto fits = [&](int pos, std::uint32_t c) {
            int slot = order[static_cast<std::size_t>(pos)];
            if (static_cast<int>(g.out(c).size()) < motif.out_degree(slot)) return false;
            if (static_cast<int>(g.in(c).size()) < motif.in_degree(slot)) return false;
            for (int j = 0; j < pos; ++j) {
                std::uint32_t x = image[static_cast<std::size_t>(j)];
                if (x == c) return false;
                int other = order[static_cast<std::size_t>(j)];
                if (g.has_edge(x, c) != motif.has_edge(other, slot)) return false;
                if (g.has_edge(c, x) != motif.has_edge(slot, other)) return false;
            }
            return true;
        };
        auto extend = [&](auto&& self, int pos) -> void {
            if (stop.load(std::memory_order_relaxed)) return;
            if (pos == k) {
                std::vector<std::uint32_t> set = image;
                std::sort(set.begin(), set.end());
                if (sets.insert(std::move(set)).second && total.fetch_add(1) + 1 >= opts.max_node_sets) stop = true;
                return;
            }
            std::uint32_t a = image[static_cast<std::size_t>(anchor[static_cast<std::size_t>(pos)])];
            for (const auto& nb : und.out(a)) {
                if (!fits(pos, nb.node)) continue;
                image[static_cast<std::size_t>(pos)] = nb.node;
                self(self, pos + 1);
            }
        };
        if (!fits(0, root)) return;
        image[0] = root;
        extend(extend, 1);
    });

    std::set<std::vector<std::uint32_t>> all;
    for (auto& s : found) all.merge(s);
    for (auto& s : all) {
        if (static_cast<std::int64_t>(result.node_sets.size()) >= opts.max_node_sets) break;
        result.node_sets.push_back(s);
    }
    if (job.cancelled()) {
        result.partial = true;
        result.partial_reason = "Cancelled";
    } else if (stop) {
        result.partial = true;
        result.partial_reason = "MatchBudgetExceeded";
    }
    return result;
}

nlohmann::json to_json(const MatchResult& r, const SimpleGraph& g) {
    nlohmann::json sets = nlohmann::json::array();
    for (const auto& s : r.node_sets) {
        nlohmann::json ids = nlohmann::json::array();
        for (auto v : s) ids.push_back(g.id(v));
        sets.push_back(ids);
    }
    nlohmann::json j{{"motif", to_json(r.motif)}, {"instances", r.node_sets.size()}, {"node_sets", sets},
                     {"partial", r.partial}};
    if (r.partial) j["partial_reason"] = r.partial_reason;
    return j;
}

// ---- reports ---------------------------------------------------------------------------------------------

MotifReport motif_report(const Motif& motif, const std::vector<std::vector<std::uint32_t>>& node_sets,
                         const std::vector<graph::FirmFinancials>& financials) {
    MotifReport r;
    r.motif = motif;
    r.instance_count = static_cast<std::int64_t>(node_sets.size());
    std::set<std::uint32_t> covered;
    for (const auto& s : node_sets) covered.insert(s.begin(), s.end());
    for (auto v : covered) {
        const auto& f = financials.at(v);
        r.default_firms += f.defaulted ? 1 : 0;
        r.total_loan_amount += f.loan_amount;
        r.total_default_amount += f.default_amount;
    }
    r.covered_firms = static_cast<int>(covered.size());
    if (r.covered_firms > 0) r.priority = static_cast<double>(r.default_firms) / r.covered_firms;
    r.ratio_default_firms = r.priority;
    if (r.total_loan_amount > 0.0) r.ratio_default_amount = r.total_default_amount / r.total_loan_amount;
    return r;
}

MotifReport motif_report(const MatchResult& match, const std::vector<graph::FirmFinancials>& financials) {
    return motif_report(match.motif, match.node_sets, financials);
}

std::vector<MotifReport> rank_motifs(std::vector<MotifReport> reports) {
    std::sort(reports.begin(), reports.end(), [](const MotifReport& a, const MotifReport& b) {
        if (a.priority != b.priority) return a.priority > b.priority;
        double ra = a.ratio_default_amount.value_or(-1.0), rb = b.ratio_default_amount.value_or(-1.0);
        if (ra != rb) return ra > rb;
        return a.motif < b.motif;
    });
    return reports;
}

nlohmann::json to_json(const MotifReport& r) {
    auto opt = [](std::optional<int> v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {{"motif", to_json(r.motif)},
            {"instances", r.instance_count},
            {"firms", r.covered_firms},
            {"default_firms", r.default_firms},
            {"ratio_default_firms", r.ratio_default_firms},
            {"ratio_default_firms_pct", opt(graph::percent_half_up(r.default_firms, r.covered_firms))},
            {"ratio_default_amount",
             r.ratio_default_amount ? nlohmann::json(*r.ratio_default_amount) : nlohmann::json(nullptr)},
            {"ratio_default_amount_pct", opt(graph::percent_half_up(r.total_default_amount, r.total_loan_amount))},
            {"total_loan_amount", r.total_loan_amount},
            {"total_default_amount", r.total_default_amount},
            {"priority", r.priority}};
}

std::string reports_to_csv(const std::vector<MotifReport>& ranked) {
    std::string out =
        "rank,motif,instances,firms,default_firms,ratio_default_firms_pct,ratio_default_amount_pct,"
        "total_loan_amount,total_default_amount\n";
    char buf[256];
    int rank = 0;
    for (const auto& r : ranked) {
        auto pf = graph::percent_half_up(r.default_firms, r.covered_firms);
        auto pa = graph::percent_half_up(r.total_default_amount, r.total_loan_amount);
        std::snprintf(buf, sizeof buf, "%d,%s,%lld,%d,%d,%s,%s,%.2f,%.2f\n", ++rank, r.motif.code_string().c_str(),
                      static_cast<long long>(r.instance_count), r.covered_firms, r.default_firms,
                      pf ? std::to_string(*pf).c_str() : "", pa ? std::to_string(*pa).c_str() : "",
                      r.total_loan_amount, r.total_default_amount);
        out += buf;
    }
    return out;
}

// ---- editing -----------------------------------------------------------------------------------------------

MotifEditResult edit_motif(const Motif& motif, const MotifEdit& edit) {
    const int k = motif.k();
    auto in_range = [&](int s) { return s >= 0 && s < k; };
    auto edges = motif.edges();
    int new_k = k;
    switch (edit.kind) {
        case MotifEdit::Kind::add_node: {
            if (k + 1 > kMaxMotifSize)
                throw Error("SizeCapExceeded", "motifs are limited to " + std::to_string(kMaxMotifSize) + " nodes");
            bool from_new = edit.from == -1 && in_range(edit.to);
            bool to_new = edit.to == -1 && in_range(edit.from);
            if (!from_new && !to_new) throw Error("InvalidEdit", "add_node needs exactly one existing slot");
            new_k = k + 1;
            edges.emplace_back(from_new ? k : edit.from, from_new ? edit.to : k);
            break;
        }
        case MotifEdit::Kind::add_edge:
            if (!in_range(edit.from) || !in_range(edit.to) || edit.from == edit.to)
                throw Error("InvalidEdit", "add_edge needs two distinct existing slots");
            if (motif.has_edge(edit.from, edit.to)) throw Error("InvalidEdit", "edge already present");
            edges.emplace_back(edit.from, edit.to);
            break;
        case MotifEdit::Kind::remove_edge: {
            if (!motif.has_edge(edit.from, edit.to)) throw Error("InvalidEdit", "edge not present");
            edges.erase(std::find(edges.begin(), edges.end(), std::make_pair(edit.from, edit.to)));
            std::uint32_t raw = 0;
            for (auto [u, v] : edges) raw |= 1u << code_bit(k, u, v);
            if (!weakly_connected(k, raw)) throw Error("DisconnectedResult", "removing the edge disconnects the motif");
            break;
        }
    }
    MotifEditResult r;
    r.motif = Motif::from_edges(new_k, edges, &r.slot_map);
    return r;
}

MotifEdit motif_edit_from_json(const nlohmann::json& j) {
    MotifEdit e;
    try {
        auto op = j.at("op").get<std::string>();
        if (op == "add_node") e.kind = MotifEdit::Kind::add_node;
        else if (op == "add_edge") e.kind = MotifEdit::Kind::add_edge;
        else if (op == "remove_edge") e.kind = MotifEdit::Kind::remove_edge;
        else throw Error("InvalidEdit", "unknown motif edit '" + op + "'");
        e.from = j.value("from", -1);
        e.to = j.value("to", -1);
    } catch (const nlohmann::json::exception& ex) {
        throw Error("InvalidEdit", std::string("malformed motif edit: ") + ex.what());
    }
    return e;
}

nlohmann::json to_json(const MotifEdit& e) {
    static const char* names[] = {"add_node", "add_edge", "remove_edge"};
    nlohmann::json j{{"op", names[static_cast<int>(e.kind)]}};
    if (e.from >= 0) j["from"] = e.from;
    if (e.to >= 0) j["to"] = e.to;
    return j;
}

}  // namespace glens::patterns
