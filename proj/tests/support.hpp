#pragma once

// Builders and brute-force oracles shared by the unit tests and the acceptance runner.
// The oracles avoid the engine's algorithms on purpose: dense matrices, exhaustive
// permutations and subset enumeration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "glens/date.hpp"
#include "glens/graph.hpp"

namespace testing {

using glens::Date;
using glens::make_date;
using glens::graph::SimpleEdge;
using glens::graph::SimpleGraph;
using glens::graph::ViewMode;

inline Date D(int y, unsigned m, unsigned d) { return make_date(y, m, d); }

// Hand-built networks for fixtures.
class NetBuilder {
public:
    NetBuilder& firm(const std::string& id, const std::string& sector = "manufacturing", double capital = 100.0) {
        glens::graph::Enterprise e;
        e.id = id;
        e.profiles.push_back({D(2010, 1, 1), "private", capital, "small", 10, sector});
        enterprises_.push_back(std::move(e));
        return *this;
    }
    NetBuilder& firms(std::initializer_list<const char*> ids) {
        for (auto* id : ids) firm(id);
        return *this;
    }
    NetBuilder& guarantee(const std::string& g, const std::string& b, double amount = 10.0,
                          Date from = D(2012, 1, 1), std::optional<Date> to = std::nullopt) {
        edges_.push_back({g, b, amount, "G" + std::to_string(edges_.size() + 1), "", from, to});
        return *this;
    }
    // A loan with monthly installments of amount / n starting a month after `start`.
    NetBuilder& loan(const std::string& contract, const std::string& borrower, double amount, Date start, int n) {
        glens::graph::LoanContract c;
        c.contract_id = contract;
        c.borrower = borrower;
        c.loan_amount = amount;
        c.start_date = start;
        c.capital_return_type = "equal";
        c.interest_return_type = "monthly";
        for (int i = 1; i <= n; ++i) c.installments.push_back({glens::add_months(start, i), amount / n});
        contracts_.push_back(std::move(c));
        return *this;
    }
    // Records a repayment for every installment; `late` maps installment index to days late
    // (negative for never paid).
    NetBuilder& repay_all(const std::string& contract, std::map<int, int> late = {}) {
        for (const auto& c : contracts_) {
            if (c.contract_id != contract) continue;
            for (std::size_t i = 0; i < c.installments.size(); ++i) {
                const auto& inst = c.installments[i];
                glens::graph::RepaymentEvent r{contract, inst.due_date, inst.due_amount, inst.due_date, inst.due_amount};
                auto it = late.find(static_cast<int>(i));
                if (it != late.end()) {
                    if (it->second < 0) {
                        r.paid_date.reset();
                        r.paid_amount = 0.0;
                    } else {
                        r.paid_date = glens::add_days(inst.due_date, it->second);
                    }
                }
                repayments_.push_back(r);
            }
        }
        return *this;
    }
    glens::graph::GuaranteeNetwork build() const {
        return glens::graph::build_network(enterprises_, edges_, contracts_, repayments_);
    }

private:
    std::vector<glens::graph::Enterprise> enterprises_;
    std::vector<glens::graph::GuaranteeEdge> edges_;
    std::vector<glens::graph::LoanContract> contracts_;
    std::vector<glens::graph::RepaymentEvent> repayments_;
};

// Directed graph on named nodes from "guarantor->borrower" pairs.
inline SimpleGraph named_digraph(std::vector<std::string> ids, const std::vector<std::pair<std::string, std::string>>& es,
                                 std::vector<double> weights = {}) {
    std::vector<SimpleEdge> edges;
    std::sort(ids.begin(), ids.end());
    auto idx = [&](const std::string& s) {
        return static_cast<std::uint32_t>(std::lower_bound(ids.begin(), ids.end(), s) - ids.begin());
    };
    for (std::size_t i = 0; i < es.size(); ++i)
        edges.push_back({idx(es[i].first), idx(es[i].second), weights.empty() ? 1.0 : weights[i]});
    return SimpleGraph::from_edges(ids, edges, ViewMode::directed);
}

inline SimpleGraph random_digraph(std::mt19937_64& rng, int n, double p) {
    std::bernoulli_distribution coin(p);
    std::vector<SimpleEdge> edges;
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            if (u != v && coin(rng)) edges.push_back({std::uint32_t(u), std::uint32_t(v), 1.0});
    return SimpleGraph::from_edges(static_cast<std::size_t>(n), edges, ViewMode::directed);
}

// ---- dense adjacency ---------------------------------------------------------------------

using Dense = std::vector<std::vector<int>>;

inline Dense dense_directed(const SimpleGraph& g) {
    Dense a(g.size(), std::vector<int>(g.size(), 0));
    for (const auto& e : g.edges()) {
        a[e.u][e.v] = 1;
        if (!g.directed()) a[e.v][e.u] = 1;
    }
    return a;
}

inline Dense dense_undirected(const SimpleGraph& g) {
    Dense a = dense_directed(g);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j)
            if (a[i][j]) a[j][i] = 1;
    return a;
}

// All-pairs hop distances by Floyd-Warshall; -1 when unreachable.
inline std::vector<std::vector<long>> floyd(const Dense& a) {
    const std::size_t n = a.size();
    const long inf = 1L << 40;
    std::vector<std::vector<long>> d(n, std::vector<long>(n, inf));
    for (std::size_t i = 0; i < n; ++i) {
        d[i][i] = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (a[i][j]) d[i][j] = 1;
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    for (auto& row : d)
        for (auto& x : row)
            if (x >= inf) x = -1;
    return d;
}

// Shortest-path counts from the distance matrix: sigma(s,t) sums sigma(s,w) over
// neighbours w of t one step closer to s.
inline std::vector<std::vector<double>> path_counts(const Dense& a, const std::vector<std::vector<long>>& d) {
    const std::size_t n = a.size();
    std::vector<std::vector<double>> sigma(n, std::vector<double>(n, 0.0));
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto x, auto y) { return d[s][x] < d[s][y]; });
        for (auto t : order) {
            if (d[s][t] < 0) continue;
            if (t == s) {
                sigma[s][t] = 1.0;
                continue;
            }
            for (std::size_t w = 0; w < n; ++w)
                if (a[w][t] && d[s][w] == d[s][t] - 1) sigma[s][t] += sigma[s][w];
        }
    }
    return sigma;
}

inline std::vector<double> brute_betweenness(const SimpleGraph& g) {
    Dense a = dense_undirected(g);
    const std::size_t n = a.size();
    std::vector<double> out(n, 0.0);
    if (n < 3) return out;
    auto d = floyd(a);
    auto sigma = path_counts(a, d);
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t t = s + 1; t < n; ++t) {
            if (d[s][t] <= 0) continue;
            for (std::size_t v = 0; v < n; ++v) {
                if (v == s || v == t || d[s][v] < 0 || d[v][t] < 0) continue;
                if (d[s][v] + d[v][t] == d[s][t]) out[v] += sigma[s][v] * sigma[v][t] / sigma[s][t];
            }
        }
    const double nn = static_cast<double>(n);
    for (auto& x : out) x /= (nn - 1.0) * (nn - 2.0) / 2.0;
    return out;
}

inline std::vector<double> brute_closeness(const SimpleGraph& g) {
    auto d = floyd(dense_undirected(g));
    const std::size_t n = d.size();
    std::vector<double> out(n, 0.0);
    if (n < 2) return out;
    for (std::size_t s = 0; s < n; ++s) {
        double sum = 0.0;
        for (std::size_t t = 0; t < n; ++t)
            if (t != s && d[s][t] > 0) sum += 1.0 / static_cast<double>(d[s][t]);
        out[s] = sum / static_cast<double>(n - 1);
    }
    return out;
}

// Solves (I - dP) x = (1-d)/n where P is column stochastic, dangling columns uniform.
inline std::vector<double> dense_pagerank(const SimpleGraph& g, double damping = 0.85) {
    const std::size_t n = g.size();
    Dense a = dense_directed(g);
    std::vector<std::vector<double>> m(n, std::vector<double>(n + 1, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        int outdeg = std::accumulate(a[j].begin(), a[j].end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            double p = outdeg ? (a[j][i] ? 1.0 / outdeg : 0.0) : 1.0 / static_cast<double>(n);
            m[i][j] = (i == j ? 1.0 : 0.0) - damping * p;
        }
    }
    for (std::size_t i = 0; i < n; ++i) m[i][n] = (1.0 - damping) / static_cast<double>(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
        std::swap(m[c], m[piv]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            double f = m[r][c] / m[c][c];
            for (std::size_t k = c; k <= n; ++k) m[r][k] -= f * m[c][k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = m[i][n] / m[i][i];
    return x;
}

// Core number by repeated peeling of the k-core for every k.
inline std::vector<int> peel_cores(const SimpleGraph& g) {
    Dense a = dense_undirected(g);
    const std::size_t n = a.size();
    std::vector<int> core(n, 0);
    for (int k = 1;; ++k) {
        std::vector<char> alive(n, 1);
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t v = 0; v < n; ++v) {
                if (!alive[v]) continue;
                int deg = 0;
                for (std::size_t w = 0; w < n; ++w) deg += alive[w] && a[v][w];
                if (deg < k) {
                    alive[v] = 0;
                    changed = true;
                }
            }
        }
        bool any = false;
        for (std::size_t v = 0; v < n; ++v)
            if (alive[v]) {
                core[v] = k;
                any = true;
            }
        if (!any) return core;
    }
}

// Largest deviation of (hub, authority) from the per-component fixed point
// a = normalize(A^T h), h = normalize(A a).
inline double hits_residual(const SimpleGraph& g, const std::vector<double>& hub, const std::vector<double>& auth) {
    Dense a = dense_directed(g);
    Dense u = dense_undirected(g);
    const std::size_t n = a.size();
    std::vector<int> comp(n, -1);
    int count = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<std::size_t> stack{s};
        comp[s] = count;
        while (!stack.empty()) {
            auto v = stack.back();
            stack.pop_back();
            for (std::size_t w = 0; w < n; ++w)
                if (u[v][w] && comp[w] < 0) {
                    comp[w] = count;
                    stack.push_back(w);
                }
        }
        ++count;
    }
    auto normalized = [&](std::vector<double> x) {
        std::vector<double> norm(count, 0.0);
        for (std::size_t i = 0; i < n; ++i) norm[comp[i]] += x[i] * x[i];
        for (std::size_t i = 0; i < n; ++i) x[i] = norm[comp[i]] > 0 ? x[i] / std::sqrt(norm[comp[i]]) : 0.0;
        return x;
    };
    std::vector<double> na(n, 0.0), nh(n, 0.0);
    for (std::size_t v = 0; v < n; ++v)
        for (std::size_t w = 0; w < n; ++w)
            if (a[w][v]) na[v] += hub[w];
    na = normalized(na);
    for (std::size_t v = 0; v < n; ++v)
        for (std::size_t w = 0; w < n; ++w)
            if (a[v][w]) nh[v] += auth[w];
    nh = normalized(nh);
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) r = std::max({r, std::fabs(na[i] - auth[i]), std::fabs(nh[i] - hub[i])});
    return r;
}

// ---- cycles, isomorphism classes, embeddings --------------------------------------------

// Simple directed cycles with at most max_len nodes, rotated to start at their smallest
// node, found by testing every ordering of every node subset.
inline std::set<std::vector<std::uint32_t>> brute_cycles(const SimpleGraph& g, int max_len) {
    Dense a = dense_directed(g);
    const int n = static_cast<int>(a.size());
    std::set<std::vector<std::uint32_t>> out;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        int size = __builtin_popcount(mask);
        if (size < 2 || size > max_len) continue;
        std::vector<std::uint32_t> nodes;
        for (int v = 0; v < n; ++v)
            if (mask & (1u << v)) nodes.push_back(static_cast<std::uint32_t>(v));
        // Fix the smallest node first; permute the rest.
        std::vector<std::uint32_t> rest(nodes.begin() + 1, nodes.end());
        do {
            std::vector<std::uint32_t> cyc{nodes[0]};
            cyc.insert(cyc.end(), rest.begin(), rest.end());
            bool ok = true;
            for (std::size_t i = 0; i < cyc.size() && ok; ++i) ok = a[cyc[i]][cyc[(i + 1) % cyc.size()]];
            if (ok) out.insert(cyc);
        } while (std::next_permutation(rest.begin(), rest.end()));
    }
    return out;
}

// Isomorphism-invariant key: the lexicographically smallest row-major adjacency string
// over every relabeling.
inline std::string iso_key(int k, const std::vector<std::pair<int, int>>& edges) {
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::string best;
    do {
        std::string s(static_cast<std::size_t>(k * k), '0');
        for (auto [u, v] : edges) s[static_cast<std::size_t>(perm[u] * k + perm[v])] = '1';
        if (best.empty() || s < best) best = s;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

inline bool weakly_connected_set(const Dense& a, const std::vector<std::uint32_t>& nodes) {
    std::vector<char> seen(nodes.size(), 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        auto i = stack.back();
        stack.pop_back();
        for (std::size_t j = 0; j < nodes.size(); ++j)
            if (!seen[j] && (a[nodes[i]][nodes[j]] || a[nodes[j]][nodes[i]])) {
                seen[j] = 1;
                ++count;
                stack.push_back(j);
            }
    }
    return count == nodes.size();
}

inline std::vector<std::pair<int, int>> induced_edges(const Dense& a, const std::vector<std::uint32_t>& nodes) {
    std::vector<std::pair<int, int>> out;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (std::size_t j = 0; j < nodes.size(); ++j)
            if (i != j && a[nodes[i]][nodes[j]]) out.push_back({int(i), int(j)});
    return out;
}

// Every weakly connected induced k-subset, keyed by iso_key.
inline std::map<std::string, std::vector<std::vector<std::uint32_t>>> brute_subgraphs(const SimpleGraph& g, int k) {
    Dense a = dense_directed(g);
    const int n = static_cast<int>(a.size());
    std::map<std::string, std::vector<std::vector<std::uint32_t>>> out;
    if (n < k) return out;
    std::vector<char> pick(static_cast<std::size_t>(n), 0);
    std::fill(pick.begin(), pick.begin() + k, 1);
    do {
        std::vector<std::uint32_t> nodes;
        for (int v = 0; v < n; ++v)
            if (pick[static_cast<std::size_t>(v)]) nodes.push_back(static_cast<std::uint32_t>(v));
        if (!weakly_connected_set(a, nodes)) continue;
        out[iso_key(k, induced_edges(a, nodes))].push_back(nodes);
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return out;
}

// Number of isomorphism classes of weakly connected k-node digraphs.
inline std::size_t brute_class_count(int k) {
    std::vector<std::pair<int, int>> slots;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (i != j) slots.push_back({i, j});
    std::set<std::string> keys;
    for (std::uint32_t mask = 0; mask < (1u << slots.size()); ++mask) {
        std::vector<std::pair<int, int>> edges;
        Dense a(static_cast<std::size_t>(k), std::vector<int>(static_cast<std::size_t>(k), 0));
        for (std::size_t b = 0; b < slots.size(); ++b)
            if (mask & (1u << b)) {
                edges.push_back(slots[b]);
                a[slots[b].first][slots[b].second] = 1;
            }
        std::vector<std::uint32_t> all(static_cast<std::size_t>(k));
        std::iota(all.begin(), all.end(), 0u);
        if (!weakly_connected_set(a, all)) continue;
        keys.insert(iso_key(k, edges));
    }
    return keys.size();
}

// Nodes that can reach `seed` along edge direction, seed excluded, via transitive closure.
inline std::vector<std::uint32_t> brute_reverse_reach(const SimpleGraph& g, std::uint32_t seed) {
    Dense r = dense_directed(g);
    const std::size_t n = r.size();
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (r[i][k] && r[k][j]) r[i][j] = 1;
    std::vector<std::uint32_t> out;
    for (std::uint32_t v = 0; v < n; ++v)
        if (v != seed && r[v][seed]) out.push_back(v);
    return out;
}

}  // namespace testing
