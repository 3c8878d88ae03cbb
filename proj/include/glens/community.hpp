#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "glens/financials.hpp"
#include "glens/graph.hpp"
#include "json.hpp"

namespace glens::community {

using Label = int;
using graph::SimpleGraph;

struct EditOp {
    enum class Kind { merge, reassign, split };
    Kind kind = Kind::merge;
    Label a = 0;        // merge: surviving (clicked) community
    Label b = 0;        // merge: absorbed community
    std::string node;   // reassign
    Label target = 0;   // reassign
    Label community = 0;  // split
    std::vector<std::pair<std::string, std::string>> cut_edges;  // split

    bool operator==(const EditOp&) const = default;
};

nlohmann::json to_json(const EditOp& op);
EditOp edit_from_json(const nlohmann::json& j);

// Node -> community assignment over the nodes of one graph, in the graph's local order.
// Values are immutable in spirit: every edit returns a new revision.
class Partition {
public:
    Partition() = default;
    Partition(std::vector<std::string> ids, std::vector<Label> labels);

    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<Label>& labels() const { return labels_; }
    Label label(std::uint32_t v) const { return labels_[v]; }
    std::optional<Label> label_of(const std::string& id) const;
    int revision() const { return revision_; }
    const std::vector<EditOp>& history() const { return history_; }

    std::map<Label, std::vector<std::uint32_t>> members() const;
    std::set<Label> community_labels() const;
    bool has(Label l) const;

    std::string fingerprint() const;
    nlohmann::json to_json() const;

private:
    friend Partition apply_edit(const Partition&, const SimpleGraph&, const EditOp&);
    friend Partition merge(const Partition&, const SimpleGraph&, Label, Label);
    friend Partition reassign(const Partition&, const SimpleGraph&, const std::string&, Label);
    friend Partition split(const Partition&, const SimpleGraph&, Label,
                           const std::vector<std::pair<std::string, std::string>>&);

    std::vector<std::string> ids_;
    std::vector<Label> labels_;
    Label next_label_ = 1;
    int revision_ = 0;
    std::vector<EditOp> history_;
};

// Short-random-walk agglomerative clustering with the dendrogram cut at maximal modularity.
// Each connected component is clustered independently; labels are numbered 1.. in order of
// each community's smallest member.
Partition detect_communities(const SimpleGraph& g, int walk_steps = 4);

// Newman modularity of the partition on the undirected unweighted view.
double modularity(const SimpleGraph& g, const std::vector<Label>& labels);

struct Spanner {
    std::uint32_t node;
    std::set<Label> foreign;  // adjacent communities other than the node's own
};

// A spanner is a node with at least one neighbour in a different community.
std::vector<Spanner> find_spanners(const Partition& p, const SimpleGraph& g);

// Errors: UnknownCommunity, SameCommunity, NotNeighbours.
Partition merge(const Partition& p, const SimpleGraph& g, Label a, Label b);
// Errors: UnknownNode, UnknownCommunity, NotASpanner, NotAdjacent.
Partition reassign(const Partition& p, const SimpleGraph& g, const std::string& node, Label target);
// Errors: UnknownCommunity, UnknownEdge, NotACut.
Partition split(const Partition& p, const SimpleGraph& g, Label community,
                const std::vector<std::pair<std::string, std::string>>& cut_edges);
Partition apply_edit(const Partition& p, const SimpleGraph& g, const EditOp& op);
Partition replay(const Partition& initial, const SimpleGraph& g, const std::vector<EditOp>& log);

struct CommunityStats {
    Label label = 0;
    int firm_count = 0;
    int default_firm_count = 0;
    double ratio_default_firms = 0.0;
    std::optional<double> ratio_default_amount;  // absent when loan amount is 0
    int spanner_count = 0;
    int neighbour_count = 0;
    double total_loan_amount = 0.0;
    double total_default_amount = 0.0;
};

// Picks the entries of a network-wide financials vector for the graph's local nodes.
std::vector<graph::FirmFinancials> local_financials(const SimpleGraph& g,
                                                    const std::vector<graph::FirmFinancials>& by_network_index);

// `financials` is indexed by the graph's local node order.
std::vector<CommunityStats> community_stats(const Partition& p, const SimpleGraph& g,
                                            const std::vector<graph::FirmFinancials>& financials);
nlohmann::json to_json(const CommunityStats& s);

struct TreemapRect {
    Label label = 0;
    double x = 0, y = 0, w = 0, h = 0;
    double default_rate = 0.0;
    double size = 0.0;  // size measure after flooring
    std::string display;
};

// Squarified layout in the unit square; area is proportional to max(size, 2% of mean size).
// The default size measure is the default-firm ratio.
std::vector<TreemapRect> treemap_layout(const std::vector<CommunityStats>& stats);
std::vector<TreemapRect> treemap_layout(const std::vector<CommunityStats>& stats, const std::vector<double>& sizes);

enum RadarAxis { kDefaults, kLoanToCapital, kDepositLoss, kSectorConcentration, kGuaranteeToCapital, kCreditRating };
inline constexpr int kRadarAxes = 6;
const char* radar_axis_name(int axis);

struct RadarProfile {
    Label label = 0;
    std::array<double, kRadarAxes> raw{};
    std::array<double, kRadarAxes> normalized{};  // raw / max over the partition's communities
    std::vector<std::string> warnings;             // MissingFinancials
};

// Profiles for every community as of the snapshot date. The graph must be a simple view of
// `snap` (for global indices); `financials` is indexed by local node.
std::vector<RadarProfile> radar_profiles(const Partition& p, const SimpleGraph& g, const graph::GuaranteeNetwork& net,
                                         const graph::Snapshot& snap,
                                         const std::vector<graph::FirmFinancials>& financials);
RadarProfile radar_profile(Label community, const Partition& p, const SimpleGraph& g,
                           const graph::GuaranteeNetwork& net, const graph::Snapshot& snap,
                           const std::vector<graph::FirmFinancials>& financials);
nlohmann::json to_json(const RadarProfile& r);

}  // namespace glens::community
