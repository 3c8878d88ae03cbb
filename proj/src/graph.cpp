#include "glens/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "glens/error.hpp"
#include "glens/hash.hpp"

namespace glens::graph {

namespace {

template <class Rec>
const Rec* latest_before(const std::vector<Rec>& recs, std::optional<Date> cutoff) {
    const Rec* best = nullptr;
    for (const auto& r : recs) {
        if (cutoff && r.as_of >= *cutoff) break;
        best = &r;
    }
    return best;
}

void extend_span(std::optional<DateRange>& span, Date d) {
    if (!span) {
        span = DateRange{d, add_days(d, 1)};
        return;
    }
    span->begin = std::min(span->begin, d);
    span->end = std::max(span->end, add_days(d, 1));
}

std::vector<std::uint32_t> set_difference(const std::vector<std::uint32_t>& a,
                                          const std::vector<std::uint32_t>& b) {
    std::vector<std::uint32_t> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

}  // namespace

const ProfileRecord* Enterprise::profile() const { return latest_before(profiles, std::nullopt); }

const ProfileRecord* Enterprise::profile_before(Date cutoff) const { return latest_before(profiles, cutoff); }

std::optional<int> Enterprise::rating_before(Date cutoff) const {
    const auto* r = latest_before(credit_ratings, cutoff);
    if (!r) return std::nullopt;
    return r->rating;
}

std::optional<int> Enterprise::latest_rating() const {
    if (credit_ratings.empty()) return std::nullopt;
    return credit_ratings.back().rating;
}

std::optional<NodeIndex> GuaranteeNetwork::find(const EnterpriseId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

NodeIndex GuaranteeNetwork::index_of(const EnterpriseId& id) const {
    auto i = find(id);
    if (!i) throw Error("UnknownEnterprise", "unknown enterprise '" + id + "'", id);
    return *i;
}

const LoanContract* GuaranteeNetwork::contract(const std::string& contract_id) const {
    auto it = contract_index_.find(contract_id);
    return it == contract_index_.end() ? nullptr : &contracts_[it->second];
}

std::span<const std::uint32_t> GuaranteeNetwork::contracts_of(NodeIndex borrower) const {
    return contracts_by_borrower_[borrower];
}

std::span<const std::uint32_t> GuaranteeNetwork::repayments_of_contract(std::uint32_t contract_pos) const {
    return repayments_by_contract_[contract_pos];
}

std::span<const EdgeIndex> GuaranteeNetwork::edges_as_guarantor(NodeIndex n) const { return out_edges_[n]; }

std::span<const EdgeIndex> GuaranteeNetwork::edges_as_borrower(NodeIndex n) const { return in_edges_[n]; }

GuaranteeNetwork build_network(std::vector<Enterprise> enterprises, std::vector<GuaranteeEdge> edges,
                               std::vector<LoanContract> contracts, std::vector<RepaymentEvent> repayments) {
    GuaranteeNetwork net;

    std::sort(enterprises.begin(), enterprises.end(),
              [](const Enterprise& a, const Enterprise& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < enterprises.size(); ++i) {
        auto& e = enterprises[i];
        if (i > 0 && enterprises[i - 1].id == e.id)
            throw Error("DuplicateId", "duplicate enterprise id '" + e.id + "'", e.id);
        auto by_date = [](const auto& a, const auto& b) { return a.as_of < b.as_of; };
        std::stable_sort(e.profiles.begin(), e.profiles.end(), by_date);
        std::stable_sort(e.credit_ratings.begin(), e.credit_ratings.end(), by_date);
        std::stable_sort(e.deposits.begin(), e.deposits.end(), by_date);
        std::stable_sort(e.statuses.begin(), e.statuses.end(), by_date);
        for (const auto& p : e.profiles) {
            if (!(p.registered_capital >= 0.0) || p.employee_count < 0)
                throw Error("InvalidValue", "negative registered capital or employee count for '" + e.id + "'",
                            e.id);
            extend_span(net.span_, p.as_of);
        }
        net.index_.emplace(e.id, static_cast<NodeIndex>(i));
        net.ids_.push_back(e.id);
    }
    net.enterprises_ = std::move(enterprises);
    const std::size_t n = net.ids_.size();

    auto resolve = [&](const EnterpriseId& id, const std::string& context) {
        auto it = net.index_.find(id);
        if (it == net.index_.end())
            throw Error("UnknownEnterprise", "unknown enterprise '" + id + "' referenced by " + context, id);
        return it->second;
    };

    net.out_edges_.resize(n);
    net.in_edges_.resize(n);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto& e = edges[i];
        const std::string ctx = "guarantee '" + e.contract_id + "'";
        NodeIndex g = resolve(e.guarantor, ctx);
        NodeIndex b = resolve(e.borrower, ctx);
        if (g == b) throw Error("InvalidEdge", ctx + " has guarantor equal to borrower", e.contract_id);
        if (!(e.amount > 0.0) || !std::isfinite(e.amount))
            throw Error("InvalidEdge", ctx + " has non-positive amount", e.contract_id);
        if (e.valid_to && *e.valid_to < e.valid_from)
            throw Error("InvalidInterval", ctx + " ends before it starts", e.contract_id);
        net.edge_guarantor_.push_back(g);
        net.edge_borrower_.push_back(b);
        net.out_edges_[g].push_back(static_cast<EdgeIndex>(i));
        net.in_edges_[b].push_back(static_cast<EdgeIndex>(i));
        extend_span(net.span_, e.valid_from);
        if (e.valid_to) extend_span(net.span_, *e.valid_to);
    }
    net.edges_ = std::move(edges);

    net.contracts_by_borrower_.resize(n);
    for (std::size_t i = 0; i < contracts.size(); ++i) {
        const auto& c = contracts[i];
        NodeIndex b = resolve(c.borrower, "loan contract '" + c.contract_id + "'");
        if (!net.contract_index_.emplace(c.contract_id, static_cast<std::uint32_t>(i)).second)
            throw Error("DuplicateId", "duplicate loan contract id '" + c.contract_id + "'", c.contract_id);
        if (!(c.loan_amount > 0.0))
            throw Error("InvalidValue", "loan contract '" + c.contract_id + "' has non-positive amount",
                        c.contract_id);
        for (std::size_t k = 1; k < c.installments.size(); ++k) {
            if (!(c.installments[k - 1].due_date < c.installments[k].due_date))
                throw Error("InvalidSchedule",
                            "loan contract '" + c.contract_id + "' has non-increasing installment dates",
                            c.contract_id);
        }
        net.contracts_by_borrower_[b].push_back(static_cast<std::uint32_t>(i));
        extend_span(net.span_, c.start_date);
        extend_span(net.span_, c.maturity());
    }
    net.contracts_ = std::move(contracts);
    for (auto& list : net.contracts_by_borrower_) {
        std::stable_sort(list.begin(), list.end(), [&](std::uint32_t a, std::uint32_t b) {
            return net.contracts_[a].start_date < net.contracts_[b].start_date;
        });
    }

    net.repayments_by_contract_.resize(net.contracts_.size());
    for (std::size_t i = 0; i < repayments.size(); ++i) {
        const auto& r = repayments[i];
        auto it = net.contract_index_.find(r.contract_id);
        if (it == net.contract_index_.end())
            throw Error("UnknownContract", "repayment references unknown contract '" + r.contract_id + "'",
                        r.contract_id);
        if (r.paid_amount < 0.0)
            throw Error("InvalidValue", "negative paid amount on contract '" + r.contract_id + "'", r.contract_id);
        net.repayments_by_contract_[it->second].push_back(static_cast<std::uint32_t>(i));
        extend_span(net.span_, r.due_date);
    }
    net.repayments_ = std::move(repayments);
    for (auto& list : net.repayments_by_contract_) {
        std::stable_sort(list.begin(), list.end(), [&](std::uint32_t a, std::uint32_t b) {
            return net.repayments_[a].due_date < net.repayments_[b].due_date;
        });
    }

    Fingerprint fp;
    for (const auto& e : net.enterprises_) {
        fp.add(e.id);
        for (const auto& p : e.profiles)
            fp.add(to_string(p.as_of)).add(p.business_nature).add(p.registered_capital).add(p.enterprise_scale)
                .add(p.employee_count).add(p.sector);
        for (const auto& c : e.credit_ratings) fp.add(to_string(c.as_of)).add(std::int64_t{c.rating});
        for (const auto& d : e.deposits) fp.add(to_string(d.as_of)).add(d.balance);
        for (const auto& s : e.statuses) fp.add(to_string(s.as_of)).add(s.status);
        fp.add(e.guarantor_type);
    }
    for (const auto& e : net.edges_)
        fp.add(e.guarantor).add(e.borrower).add(e.amount).add(e.contract_id).add(e.loan_contract_id)
            .add(to_string(e.valid_from)).add(e.valid_to ? to_string(*e.valid_to) : "-");
    for (const auto& c : net.contracts_) {
        fp.add(c.contract_id).add(c.borrower).add(c.loan_amount).add(to_string(c.start_date))
            .add(c.capital_return_type).add(c.interest_return_type);
        for (const auto& i : c.installments) fp.add(to_string(i.due_date)).add(i.due_amount);
    }
    for (const auto& r : net.repayments_)
        fp.add(r.contract_id).add(to_string(r.due_date)).add(r.due_amount)
            .add(r.paid_date ? to_string(*r.paid_date) : "-").add(r.paid_amount);
    net.fingerprint_ = fp.hex();
    return net;
}

Snapshot snapshot(const GuaranteeNetwork& net, Date as_of) {
    Snapshot s;
    s.as_of = as_of;
    std::vector<char> present(net.node_count(), 0);
    for (EdgeIndex e = 0; e < net.edges().size(); ++e) {
        if (!net.edges()[e].active_at(as_of)) continue;
        s.edges.push_back(e);
        present[net.guarantor_index(e)] = 1;
        present[net.borrower_index(e)] = 1;
    }
    for (NodeIndex v = 0; v < net.node_count(); ++v) {
        if (present[v]) continue;
        for (auto c : net.contracts_of(v)) {
            if (net.contracts()[c].active_at(as_of)) {
                present[v] = 1;
                break;
            }
        }
    }
    for (NodeIndex v = 0; v < net.node_count(); ++v)
        if (present[v]) s.nodes.push_back(v);
    return s;
}

NetworkDiff diff_snapshots(const GuaranteeNetwork& net, Date t1, Date t2) {
    if (t1 > t2) throw Error("BadRange", "diff range start " + to_string(t1) + " is after end " + to_string(t2));
    Snapshot a = snapshot(net, t1);
    Snapshot b = snapshot(net, t2);
    NetworkDiff d;
    d.added_nodes = set_difference(b.nodes, a.nodes);
    d.removed_nodes = set_difference(a.nodes, b.nodes);
    d.added_edges = set_difference(b.edges, a.edges);
    d.removed_edges = set_difference(a.edges, b.edges);
    return d;
}

Snapshot apply_diff(const Snapshot& base, const NetworkDiff& diff, Date as_of) {
    auto apply = [](const std::vector<std::uint32_t>& cur, const std::vector<std::uint32_t>& add,
                    const std::vector<std::uint32_t>& remove) {
        std::vector<std::uint32_t> kept = set_difference(cur, remove);
        std::vector<std::uint32_t> out;
        std::set_union(kept.begin(), kept.end(), add.begin(), add.end(), std::back_inserter(out));
        return out;
    };
    Snapshot s;
    s.as_of = as_of;
    s.nodes = apply(base.nodes, diff.added_nodes, diff.removed_nodes);
    s.edges = apply(base.edges, diff.added_edges, diff.removed_edges);
    return s;
}

SimpleGraph SimpleGraph::from_edges(std::vector<std::string> node_ids, const std::vector<SimpleEdge>& edges,
                                    ViewMode mode) {
    SimpleGraph g;
    g.mode_ = mode;
    g.ids_ = std::move(node_ids);
    const std::size_t n = g.ids_.size();
    for (std::uint32_t i = 0; i < n; ++i) g.index_.emplace(g.ids_[i], i);

    std::map<std::pair<std::uint32_t, std::uint32_t>, double> merged;
    for (const auto& e : edges) {
        if (e.u == e.v) continue;
        if (e.u >= n || e.v >= n) throw Error("UnknownNode", "edge endpoint out of range");
        auto key = (mode == ViewMode::undirected && e.u > e.v) ? std::pair{e.v, e.u} : std::pair{e.u, e.v};
        merged[key] += e.weight;
    }
    g.out_.assign(n, {});
    if (mode == ViewMode::directed) g.in_.assign(n, {});
    for (const auto& [key, w] : merged) {
        auto [u, v] = key;
        g.edges_.push_back({u, v, w});
        g.out_[u].push_back({v, w});
        if (mode == ViewMode::directed)
            g.in_[v].push_back({u, w});
        else
            g.out_[v].push_back({u, w});
    }
    auto by_node = [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; };
    for (auto& l : g.out_) std::sort(l.begin(), l.end(), by_node);
    for (auto& l : g.in_) std::sort(l.begin(), l.end(), by_node);
    return g;
}

SimpleGraph SimpleGraph::from_edges(std::size_t n, const std::vector<SimpleEdge>& edges, ViewMode mode) {
    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        char buf[24];
        std::snprintf(buf, sizeof buf, "%06zu", i);
        ids[i] = buf;
    }
    return from_edges(std::move(ids), edges, mode);
}

std::optional<std::uint32_t> SimpleGraph::find(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

bool SimpleGraph::has_edge(std::uint32_t u, std::uint32_t v) const {
    const auto& l = out_[u];
    auto it = std::lower_bound(l.begin(), l.end(), v, [](const Neighbor& a, std::uint32_t x) { return a.node < x; });
    return it != l.end() && it->node == v;
}

SimpleGraph SimpleGraph::induced(std::span<const std::uint32_t> nodes) const {
    std::vector<std::int64_t> local(size(), -1);
    std::vector<std::string> ids;
    std::vector<NodeIndex> glob;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        local[nodes[i]] = static_cast<std::int64_t>(i);
        ids.push_back(ids_[nodes[i]]);
        if (!global_.empty()) glob.push_back(global_[nodes[i]]);
    }
    std::vector<SimpleEdge> es;
    for (const auto& e : edges_) {
        if (local[e.u] >= 0 && local[e.v] >= 0)
            es.push_back({static_cast<std::uint32_t>(local[e.u]), static_cast<std::uint32_t>(local[e.v]), e.weight});
    }
    SimpleGraph g = from_edges(std::move(ids), es, mode_);
    g.global_ = std::move(glob);
    return g;
}

SimpleGraph SimpleGraph::as_undirected() const {
    SimpleGraph g = from_edges(ids_, edges_, ViewMode::undirected);
    g.global_ = global_;
    return g;
}

SimpleGraph simple_view(const GuaranteeNetwork& net, const Snapshot& snap, ViewMode mode) {
    std::vector<std::int64_t> local(net.node_count(), -1);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < snap.nodes.size(); ++i) {
        local[snap.nodes[i]] = static_cast<std::int64_t>(i);
        ids.push_back(net.enterprise_ids()[snap.nodes[i]]);
    }
    std::vector<SimpleEdge> es;
    es.reserve(snap.edges.size());
    for (EdgeIndex e : snap.edges) {
        auto u = local[net.guarantor_index(e)];
        auto v = local[net.borrower_index(e)];
        if (u < 0 || v < 0) continue;
        es.push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v), net.edges()[e].amount});
    }
    SimpleGraph g = SimpleGraph::from_edges(std::move(ids), es, mode);
    g.global_ = snap.nodes;
    return g;
}

}  // namespace glens::graph
