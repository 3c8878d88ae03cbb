#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "glens/graph.hpp"
#include "glens/job.hpp"
#include "json.hpp"

namespace glens::contagion {

using graph::SimpleGraph;
// (guarantor, borrower) pairs of local indices.
using EdgeSet = std::set<std::pair<std::uint32_t, std::uint32_t>>;

struct PathCaps {
    int max_len = 8;  // edges per path
    std::int64_t max_paths = 100000;
};

struct PropagationResult {
    std::uint32_t seed = 0;
    // Each path starts at the seed; path[i+1] guarantees path[i].
    std::vector<std::vector<std::uint32_t>> paths;
    bool truncated = false;
    std::vector<std::int64_t> occurrence;  // per local node: paths containing it
    std::vector<double> importance;        // occurrence / max occurrence
};

// Defaults spread from a borrower to its guarantors. All functions take the directed
// simple view (guarantor -> borrower) and ignore edges listed in `removed`.

// Every node reachable from the seed against edge direction, seed excluded, sorted.
// Errors: UnknownNode.
std::vector<std::uint32_t> contagion_set(const SimpleGraph& g, const std::string& seed, const EdgeSet* removed = nullptr);

// Maximal simple reverse paths explored in id order. A seed without guarantors has no
// paths. Errors: UnknownNode, InvalidArgument (max_len < 1).
PropagationResult enumerate_paths(const SimpleGraph& g, const std::string& seed, const PathCaps& caps = {},
                                  const EdgeSet* removed = nullptr);

struct ImportanceResult {
    std::vector<std::int64_t> occurrence;  // summed over every seed
    std::vector<double> importance;
    bool truncated = false;
    bool cancelled = false;
};

ImportanceResult propagation_importance(const SimpleGraph& g, const PathCaps& caps = {},
                                        const EdgeSet* removed = nullptr, const JobControl& job = {});

struct SankeyLink {
    std::uint32_t guarantor = 0;
    std::uint32_t borrower = 0;
    double value = 0.0;  // guarantee amount
};

struct SankeyNode {
    std::uint32_t node = 0;
    double given = 0.0;     // guarantee amount provided, over the whole view
    double received = 0.0;  // guarantee amount received, over the whole view
};

struct SankeyFlow {
    std::uint32_t focus = 0;
    std::vector<SankeyNode> nodes;  // focus plus every node on its propagation paths, sorted
    std::vector<SankeyLink> links;  // one per edge used by those paths, sorted
    bool truncated = false;
};

// Errors: UnknownNode.
SankeyFlow sankey_flow(const SimpleGraph& g, const std::string& focus, const PathCaps& caps = {},
                       const EdgeSet* removed = nullptr);

// Per-analyst cut state over an immutable view.
class CutSession {
public:
    explicit CutSession(SimpleGraph directed);

    const SimpleGraph& graph() const { return graph_; }
    const EdgeSet& cuts() const { return cuts_; }

    // Errors: UnknownEdge. Cutting twice or reverting an uncut edge changes nothing.
    void apply_cut(const std::string& guarantor, const std::string& borrower);
    void revert_cut(const std::string& guarantor, const std::string& borrower);

    PropagationResult paths(const std::string& seed, const PathCaps& caps = {}) const;
    SankeyFlow sankey(const std::string& focus, const PathCaps& caps = {}) const;
    std::string fingerprint() const;

private:
    std::pair<std::uint32_t, std::uint32_t> resolve(const std::string& guarantor, const std::string& borrower) const;

    SimpleGraph graph_;
    EdgeSet cuts_;
};

std::string fingerprint(const PropagationResult& r, const SimpleGraph& g);
nlohmann::json to_json(const PropagationResult& r, const SimpleGraph& g);
nlohmann::json to_json(const ImportanceResult& r, const SimpleGraph& g);
nlohmann::json to_json(const SankeyFlow& s, const SimpleGraph& g);
// path,step,guarantor,borrower
std::string paths_to_csv(const PropagationResult& r, const SimpleGraph& g);

}  // namespace glens::contagion
