#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "glens/date.hpp"

namespace glens::graph {

using EnterpriseId = std::string;
using NodeIndex = std::uint32_t;  // position in GuaranteeNetwork::enterprise_ids()
using EdgeIndex = std::uint32_t;  // position in GuaranteeNetwork::edges()

struct ProfileRecord {
    Date as_of;
    std::string business_nature;
    double registered_capital = 0.0;
    std::string enterprise_scale;
    std::int64_t employee_count = 0;
    std::string sector;
};

struct CreditRecord {
    Date as_of;
    int rating = 0;  // ordinal, higher is riskier
};

struct DepositRecord {
    Date as_of;
    double balance = 0.0;
};

struct StatusRecord {
    Date as_of;
    std::string status;
};

// Registration data changes over time; every history is kept sorted by date.
struct Enterprise {
    EnterpriseId id;
    std::vector<ProfileRecord> profiles;
    std::vector<CreditRecord> credit_ratings;
    std::vector<DepositRecord> deposits;
    std::vector<StatusRecord> statuses;
    std::string guarantor_type;

    // Latest profile, or nullptr when none was recorded.
    const ProfileRecord* profile() const;
    // Latest profile dated strictly before `cutoff`.
    const ProfileRecord* profile_before(Date cutoff) const;
    std::optional<int> rating_before(Date cutoff) const;
    std::optional<int> latest_rating() const;
};

struct GuaranteeEdge {
    EnterpriseId guarantor;
    EnterpriseId borrower;
    double amount = 0.0;
    std::string contract_id;       // guarantee contract
    std::string loan_contract_id;  // loan being guaranteed; may be empty
    Date valid_from;
    std::optional<Date> valid_to;  // open-ended when absent

    bool active_at(Date d) const { return valid_from <= d && (!valid_to || d <= *valid_to); }
};

struct Installment {
    Date due_date;
    double due_amount = 0.0;
};

struct LoanContract {
    std::string contract_id;
    EnterpriseId borrower;
    double loan_amount = 0.0;
    Date start_date;
    std::string capital_return_type;
    std::string interest_return_type;
    std::vector<Installment> installments;

    // Last installment due date, or the start date for an empty schedule.
    Date maturity() const { return installments.empty() ? start_date : installments.back().due_date; }
    bool active_at(Date d) const { return start_date <= d && d <= maturity(); }
};

struct RepaymentEvent {
    std::string contract_id;
    Date due_date;
    double due_amount = 0.0;
    std::optional<Date> paid_date;
    double paid_amount = 0.0;

    bool is_default(int grace_days = 0) const {
        return !paid_date || *paid_date > add_days(due_date, grace_days);
    }
    // Default decidable from information dated before `cutoff`.
    bool known_default_before(Date cutoff, int grace_days = 0) const {
        Date deadline = add_days(due_date, grace_days);
        if (deadline >= cutoff) return false;
        return !paid_date || *paid_date > deadline;
    }
};

// Read-only after construction; see build_network.
class GuaranteeNetwork {
public:
    const std::vector<EnterpriseId>& enterprise_ids() const { return ids_; }
    const std::vector<Enterprise>& enterprises() const { return enterprises_; }
    const std::vector<GuaranteeEdge>& edges() const { return edges_; }
    const std::vector<LoanContract>& contracts() const { return contracts_; }
    const std::vector<RepaymentEvent>& repayments() const { return repayments_; }

    std::size_t node_count() const { return ids_.size(); }
    std::optional<NodeIndex> find(const EnterpriseId& id) const;
    NodeIndex index_of(const EnterpriseId& id) const;  // throws UnknownEnterprise
    const Enterprise& enterprise(NodeIndex i) const { return enterprises_[i]; }
    const LoanContract* contract(const std::string& contract_id) const;

    NodeIndex guarantor_index(EdgeIndex e) const { return edge_guarantor_[e]; }
    NodeIndex borrower_index(EdgeIndex e) const { return edge_borrower_[e]; }

    // Contract positions (into contracts()) per borrower, sorted by start date.
    std::span<const std::uint32_t> contracts_of(NodeIndex borrower) const;
    // Repayment positions (into repayments()) per contract position, sorted by due date.
    std::span<const std::uint32_t> repayments_of_contract(std::uint32_t contract_pos) const;
    // Edge positions where the node is guarantor / borrower.
    std::span<const EdgeIndex> edges_as_guarantor(NodeIndex n) const;
    std::span<const EdgeIndex> edges_as_borrower(NodeIndex n) const;

    // Earliest and latest date found in any record.
    std::optional<DateRange> date_span() const { return span_; }

    // Content hash over the canonical record ordering.
    const std::string& fingerprint() const { return fingerprint_; }

private:
    friend GuaranteeNetwork build_network(std::vector<Enterprise>, std::vector<GuaranteeEdge>,
                                          std::vector<LoanContract>, std::vector<RepaymentEvent>);

    std::vector<EnterpriseId> ids_;
    std::vector<Enterprise> enterprises_;
    std::unordered_map<EnterpriseId, NodeIndex> index_;
    std::vector<GuaranteeEdge> edges_;
    std::vector<NodeIndex> edge_guarantor_, edge_borrower_;
    std::vector<LoanContract> contracts_;
    std::unordered_map<std::string, std::uint32_t> contract_index_;
    std::vector<RepaymentEvent> repayments_;

    std::vector<std::vector<std::uint32_t>> contracts_by_borrower_;
    std::vector<std::vector<std::uint32_t>> repayments_by_contract_;
    std::vector<std::vector<EdgeIndex>> out_edges_, in_edges_;
    std::optional<DateRange> span_;
    std::string fingerprint_;
};

// Validates referential integrity and intervals. Errors: DuplicateId, UnknownEnterprise,
// UnknownContract, InvalidInterval, InvalidEdge, InvalidSchedule, InvalidValue.
GuaranteeNetwork build_network(std::vector<Enterprise> enterprises, std::vector<GuaranteeEdge> edges,
                               std::vector<LoanContract> contracts,
                               std::vector<RepaymentEvent> repayments);

struct Snapshot {
    Date as_of;
    std::vector<NodeIndex> nodes;  // sorted
    std::vector<EdgeIndex> edges;  // sorted

    bool operator==(const Snapshot&) const = default;
};

struct NetworkDiff {
    std::vector<NodeIndex> added_nodes, removed_nodes;
    std::vector<EdgeIndex> added_edges, removed_edges;

    bool empty() const {
        return added_nodes.empty() && removed_nodes.empty() && added_edges.empty() && removed_edges.empty();
    }
    bool operator==(const NetworkDiff&) const = default;
};

Snapshot snapshot(const GuaranteeNetwork& net, Date as_of);

// Throws BadRange when t1 > t2.
NetworkDiff diff_snapshots(const GuaranteeNetwork& net, Date t1, Date t2);

Snapshot apply_diff(const Snapshot& base, const NetworkDiff& diff, Date as_of);

enum class ViewMode { directed, undirected };

struct SimpleEdge {
    std::uint32_t u = 0;
    std::uint32_t v = 0;
    double weight = 0.0;  // summed amounts of the collapsed edges
};

struct Neighbor {
    std::uint32_t node;
    double weight;
};

// Collapsed, locally indexed graph consumed by the algorithms. Local node order follows
// the enterprise id order, so "smallest id" tie-breaks reduce to smallest local index.
class SimpleGraph {
public:
    SimpleGraph() = default;

    // Edges with u == v are dropped; parallel edges are merged with summed weight.
    // For undirected graphs (u,v) and (v,u) are the same edge.
    static SimpleGraph from_edges(std::vector<std::string> node_ids, const std::vector<SimpleEdge>& edges,
                                  ViewMode mode);
    // Node ids default to zero-padded decimal indices.
    static SimpleGraph from_edges(std::size_t n, const std::vector<SimpleEdge>& edges, ViewMode mode);

    std::size_t size() const { return ids_.size(); }
    bool directed() const { return mode_ == ViewMode::directed; }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::string& id(std::uint32_t v) const { return ids_[v]; }
    std::optional<std::uint32_t> find(const std::string& id) const;

    // Unique edges; u < v when undirected.
    const std::vector<SimpleEdge>& edges() const { return edges_; }
    // Sorted by neighbour index. Undirected graphs use out() for both directions.
    const std::vector<Neighbor>& out(std::uint32_t v) const { return out_[v]; }
    const std::vector<Neighbor>& in(std::uint32_t v) const { return directed() ? in_[v] : out_[v]; }
    bool has_edge(std::uint32_t u, std::uint32_t v) const;
    std::size_t degree(std::uint32_t v) const { return directed() ? out_[v].size() + in_[v].size() : out_[v].size(); }

    // Node-induced subgraph on `nodes` (local indices of this graph), preserving order.
    SimpleGraph induced(std::span<const std::uint32_t> nodes) const;
    SimpleGraph as_undirected() const;

    // Global network indices per local node when built from a snapshot.
    const std::vector<NodeIndex>& global() const { return global_; }

private:
    friend SimpleGraph simple_view(const GuaranteeNetwork&, const Snapshot&, ViewMode);

    ViewMode mode_ = ViewMode::directed;
    std::vector<std::string> ids_;
    std::vector<NodeIndex> global_;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::vector<SimpleEdge> edges_;
    std::vector<std::vector<Neighbor>> out_, in_;
};

SimpleGraph simple_view(const GuaranteeNetwork& net, const Snapshot& snap, ViewMode mode);

}  // namespace glens::graph
