#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "glens/financials.hpp"
#include "glens/graph.hpp"
#include "glens/job.hpp"
#include "json.hpp"

namespace glens::patterns {

using graph::SimpleGraph;

// ---- guarantee circles ----------------------------------------------------------------

enum class CircleKind { mutual, revolving, star, joint_liability };
std::string_view to_string(CircleKind kind);

struct GuaranteeCircle {
    CircleKind kind = CircleKind::mutual;
    // Cycles: nodes in guarantee order starting at the smallest index.
    // Stars: guarantor first, then borrowers. Joint liability: borrower first, then guarantors.
    std::vector<std::uint32_t> members;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // guarantor -> borrower
};

struct CircleOptions {
    int max_cycle_len = 8;
    std::int64_t max_cycles = 100000;
    int star_min_borrowers = 3;
    int joint_min_guarantors = 2;
};

struct CircleReport {
    std::vector<GuaranteeCircle> mutual, revolving, star, joint_liability;
    bool partial = false;
    std::string partial_reason;  // CycleBudgetExceeded or Cancelled
};

// All simple directed cycles with at most `max_len` nodes, each once, starting at its
// smallest node. Sets *exhausted when the cap stopped the search.
std::vector<std::vector<std::uint32_t>> simple_cycles(const SimpleGraph& g, int max_len, std::int64_t max_cycles,
                                                      bool* exhausted = nullptr, const JobControl& job = {});

// `g` must be a directed view. Errors: InvalidArgument (max_cycle_len < 2).
CircleReport detect_circles(const SimpleGraph& g, const CircleOptions& opts = {}, const JobControl& job = {});
nlohmann::json to_json(const CircleReport& r, const SimpleGraph& g);

// ---- motifs ---------------------------------------------------------------------------

inline constexpr int kMaxMotifSize = 6;

// Weakly connected digraph on k slots without self-loops, always stored in canonical
// labeling: its adjacency code is the minimum over all slot permutations.
class Motif {
public:
    Motif() = default;

    // Canonicalizes. When `slot_map` is given it receives, per input slot, the canonical slot.
    // Errors: InvalidMotif (bad size, self-loop, slot out of range, not weakly connected).
    static Motif from_edges(int k, const std::vector<std::pair<int, int>>& edges, std::vector<int>* slot_map = nullptr);

    int k() const { return k_; }
    std::uint32_t code() const { return code_; }
    std::string code_string() const;
    std::vector<std::pair<int, int>> edges() const;
    bool has_edge(int from, int to) const;
    int out_degree(int slot) const;
    int in_degree(int slot) const;

    bool operator==(const Motif& o) const { return k_ == o.k_ && code_ == o.code_; }
    bool operator<(const Motif& o) const { return k_ != o.k_ ? k_ < o.k_ : code_ < o.code_; }

private:
    int k_ = 0;
    std::uint32_t code_ = 0;
};

// Bit position of the ordered slot pair (from, to) inside a k-slot adjacency code.
int code_bit(int k, int from, int to);
// Minimal code over all permutations of the k slots.
std::uint32_t canonical_code(int k, std::uint32_t raw);
bool weakly_connected(int k, std::uint32_t raw);

// Every isomorphism class of weakly connected k-node digraphs. Errors: InvalidArgument (k outside 3..5).
std::vector<Motif> enumerate_motif_classes(int k);

nlohmann::json to_json(const Motif& m);
Motif motif_from_json(const nlohmann::json& j);

struct CensusEntry {
    Motif motif;
    std::int64_t count = 0;
};

struct CensusOptions {
    std::int64_t max_subgraphs = 50'000'000;
};

struct CensusResult {
    int k = 0;
    std::vector<CensusEntry> classes;  // count descending, then motif order
    std::int64_t subgraphs = 0;        // connected k-node sets visited
    bool partial = false;
    std::string partial_reason;  // CensusBudgetExceeded or Cancelled
};

// Counts induced weakly connected k-node sub-digraphs per class. Errors: InvalidArgument.
CensusResult motif_census(const SimpleGraph& g, int k, const CensusOptions& opts = {}, const JobControl& job = {});
nlohmann::json to_json(const CensusResult& r);

struct MatchOptions {
    std::int64_t max_node_sets = 1'000'000;
    unsigned threads = 0;  // 0 picks the hardware concurrency
};

struct MatchResult {
    Motif motif;
    std::vector<std::vector<std::uint32_t>> node_sets;  // each sorted; list sorted
    bool partial = false;
    std::string partial_reason;  // MatchBudgetExceeded or Cancelled
};

// Node sets whose induced sub-digraph is isomorphic to the motif; each set once.
MatchResult match_motif(const SimpleGraph& g, const Motif& motif, const MatchOptions& opts = {},
                        const JobControl& job = {});
nlohmann::json to_json(const MatchResult& r, const SimpleGraph& g);

struct MotifReport {
    Motif motif;
    std::int64_t instance_count = 0;
    int covered_firms = 0;
    int default_firms = 0;
    double ratio_default_firms = 0.0;
    std::optional<double> ratio_default_amount;  // absent when covered firms have no loans
    double total_loan_amount = 0.0;
    double total_default_amount = 0.0;
    double priority = 0.0;  // default firms / covered firms over the deduplicated union
};

// `financials` is indexed by the graph's local node order.
MotifReport motif_report(const Motif& motif, const std::vector<std::vector<std::uint32_t>>& node_sets,
                         const std::vector<graph::FirmFinancials>& financials);
MotifReport motif_report(const MatchResult& match, const std::vector<graph::FirmFinancials>& financials);

// Priority descending, then default-amount ratio descending, then motif order.
std::vector<MotifReport> rank_motifs(std::vector<MotifReport> reports);

nlohmann::json to_json(const MotifReport& r);
// One column per ranked motif, rows as in the motif statistics table.
std::string reports_to_csv(const std::vector<MotifReport>& ranked);

struct MotifEdit {
    enum class Kind { add_node, add_edge, remove_edge };
    Kind kind = Kind::add_edge;
    // add_node: exactly one of from/to names an existing slot, the other is -1 (the new node).
    int from = -1;
    int to = -1;
};

struct MotifEditResult {
    Motif motif;
    std::vector<int> slot_map;  // old slot (and k for an added node) -> new canonical slot
};

// Errors: DisconnectedResult, SizeCapExceeded, InvalidEdit.
MotifEditResult edit_motif(const Motif& motif, const MotifEdit& edit);
MotifEdit motif_edit_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MotifEdit& e);

}  // namespace glens::patterns
