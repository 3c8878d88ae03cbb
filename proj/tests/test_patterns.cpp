#include <random>

#include "doctest.h"
#include "glens/error.hpp"
#include "glens/ingest.hpp"
#include "glens/patterns.hpp"
#include "support.hpp"

using namespace glens;
using namespace glens::patterns;
using graph::SimpleEdge;
using graph::SimpleGraph;
using graph::ViewMode;

namespace {

std::string error_code(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "none";
}

// Disjoint union of motifs, one component each.
SimpleGraph union_of(const std::vector<Motif>& motifs) {
    std::vector<SimpleEdge> edges;
    std::uint32_t base = 0;
    for (const auto& m : motifs) {
        for (auto [u, v] : m.edges()) edges.push_back({base + std::uint32_t(u), base + std::uint32_t(v), 1.0});
        base += static_cast<std::uint32_t>(m.k());
    }
    return SimpleGraph::from_edges(base, edges, ViewMode::directed);
}

graph::GuaranteeNetwork whole(const ingest::SyntheticData& data, SimpleGraph* g) {
    auto net = ingest::join_to_network(data.tables);
    std::vector<SimpleEdge> edges;
    for (graph::EdgeIndex e = 0; e < net.edges().size(); ++e)
        edges.push_back({net.guarantor_index(e), net.borrower_index(e), 1.0});
    *g = SimpleGraph::from_edges(net.enterprise_ids(), edges, ViewMode::directed);
    return net;
}

}  // namespace

TEST_CASE("circles on small shapes") {
    auto g = testing::named_digraph({"A", "B", "C", "D", "E", "F"},
                                    {{"A", "B"}, {"B", "A"}, {"C", "D"}, {"D", "E"}, {"E", "C"}, {"F", "C"}, {"F", "D"}, {"F", "E"}});
    auto r = detect_circles(g);
    REQUIRE(r.mutual.size() == 1);
    CHECK(r.mutual[0].members == std::vector<std::uint32_t>{0, 1});
    REQUIRE(r.revolving.size() == 1);
    CHECK(r.revolving[0].members == std::vector<std::uint32_t>{2, 3, 4});
    REQUIRE(r.star.size() == 1);
    CHECK(r.star[0].members.front() == 5);
    // C, D and E each have two guarantors.
    CHECK(r.joint_liability.size() == 3);
    CHECK_FALSE(r.partial);
    CHECK(to_json(r, g)["mutual"][0]["members"] == nlohmann::json{"A", "B"});
    CHECK(error_code([&] { detect_circles(g, {1}); }) == "InvalidArgument");

    CircleOptions tight;
    tight.max_cycles = 1;
    CHECK(detect_circles(g, tight).partial_reason == "CycleBudgetExceeded");
}

TEST_CASE("simple cycles equal the brute-force enumeration") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 3 + static_cast<int>(rng() % 8);
        auto g = testing::random_digraph(rng, n, 0.3);
        int max_len = 2 + static_cast<int>(rng() % (n - 1));
        auto cycles = simple_cycles(g, max_len, 1'000'000);
        std::set<std::vector<std::uint32_t>> got(cycles.begin(), cycles.end());
        CHECK(got.size() == cycles.size());
        CHECK(got == testing::brute_cycles(g, max_len));
        auto r = detect_circles(g, {max_len});
        for (const auto& c : r.revolving) CHECK(c.members.size() >= 3);
        CHECK(r.mutual.size() + r.revolving.size() == cycles.size());
    }
}

TEST_CASE("motif class counts match brute force") {
    CHECK(enumerate_motif_classes(3).size() == 13);
    CHECK(enumerate_motif_classes(3).size() == testing::brute_class_count(3));
    CHECK(enumerate_motif_classes(4).size() == 199);
    CHECK(enumerate_motif_classes(4).size() == testing::brute_class_count(4));
    CHECK(error_code([] { enumerate_motif_classes(2); }) == "InvalidArgument");
    CHECK(error_code([] { enumerate_motif_classes(6); }) == "InvalidArgument");
}

TEST_CASE("canonical codes are permutation invariant and separate classes") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 200; ++trial) {
        int k = 3 + static_cast<int>(rng() % 3);
        std::vector<std::pair<int, int>> edges;
        for (int u = 0; u < k; ++u)
            for (int v = 0; v < k; ++v)
                if (u != v && rng() % 3 == 0) edges.push_back({u, v});
        for (int v = 1; v < k; ++v) edges.push_back({v - 1, v});
        std::vector<int> perm(k);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::pair<int, int>> moved;
        for (auto [u, v] : edges) moved.push_back({perm[u], perm[v]});
        auto a = Motif::from_edges(k, edges), b = Motif::from_edges(k, moved);
        CHECK(a == b);

        std::vector<std::pair<int, int>> other;
        for (int u = 0; u < k; ++u)
            for (int v = 0; v < k; ++v)
                if (u != v && rng() % 2 == 0) other.push_back({u, v});
        if (error_code([&] { Motif::from_edges(k, other); }) != "none") continue;
        auto c = Motif::from_edges(k, other);
        CHECK((a == c) == (testing::iso_key(k, edges) == testing::iso_key(k, other)));
    }
    CHECK(error_code([] { Motif::from_edges(3, {{0, 1}}); }) == "InvalidMotif");
    CHECK(error_code([] { Motif::from_edges(2, {{0, 0}}); }) == "InvalidMotif");
    CHECK(motif_from_json(to_json(Motif::from_edges(3, {{0, 1}, {1, 2}}))) == Motif::from_edges(3, {{0, 1}, {1, 2}}));
}

TEST_CASE("census and matching agree with subset enumeration") {
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 4 + static_cast<int>(rng() % 8);
        auto g = testing::random_digraph(rng, n, 0.25);
        for (int k = 3; k <= 4; ++k) {
            auto oracle = testing::brute_subgraphs(g, k);
            auto census = motif_census(g, k);
            CHECK(census.classes.size() == oracle.size());
            std::int64_t total = 0;
            for (const auto& entry : census.classes) {
                auto edges = entry.motif.edges();
                auto it = oracle.find(testing::iso_key(k, edges));
                REQUIRE(it != oracle.end());
                CHECK(entry.count == static_cast<std::int64_t>(it->second.size()));
                total += entry.count;

                auto match = match_motif(g, entry.motif);
                auto expected = it->second;
                std::sort(expected.begin(), expected.end());
                CHECK(match.node_sets == expected);
            }
            CHECK(census.subgraphs == total);
        }
    }
}

TEST_CASE("census of a directed 3-path and matches on small graphs") {
    auto path = testing::named_digraph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}});
    auto census = motif_census(path, 3);
    REQUIRE(census.classes.size() == 1);
    CHECK(census.classes[0].count == 1);
    auto m = match_motif(path, Motif::from_edges(3, {{0, 1}, {1, 2}}));
    CHECK(m.node_sets == std::vector<std::vector<std::uint32_t>>{{0, 1, 2}});
    CHECK(match_motif(path, Motif::from_edges(4, {{0, 1}, {1, 2}, {2, 3}})).node_sets.empty());
    CHECK(error_code([&] { motif_census(path, 2); }) == "InvalidArgument");

    MatchOptions cap;
    cap.max_node_sets = 1;
    auto two = testing::named_digraph({"a", "b", "c", "d"}, {{"a", "b"}, {"b", "c"}, {"c", "d"}});
    auto partial = match_motif(two, Motif::from_edges(3, {{0, 1}, {1, 2}}), cap);
    CHECK(partial.partial);
    CHECK(partial.partial_reason == "MatchBudgetExceeded");
}

TEST_CASE("a fixture with twenty distinct four-node classes") {
    auto classes = enumerate_motif_classes(4);
    std::vector<Motif> picked(classes.begin() + 40, classes.begin() + 60);
    auto g = union_of(picked);
    auto census = motif_census(g, 4);
    CHECK(census.classes.size() == 20);
    for (const auto& e : census.classes) CHECK(e.count == 1);
    CHECK(testing::brute_subgraphs(g, 4).size() == 20);
}

TEST_CASE("planted motif instances are recovered") {
    ingest::SyntheticConfig cfg;
    cfg.seed = 5;
    cfg.motifs = ingest::feed_forward_library(2);
    auto data = ingest::generate_synthetic(cfg);
    SimpleGraph g;
    whole(data, &g);
    REQUIRE_FALSE(data.truth.motifs.empty());
    for (const auto& pm : data.truth.motifs) {
        auto result = match_motif(g, Motif::from_edges(pm.k, pm.edges));
        std::set<std::vector<std::uint32_t>> found(result.node_sets.begin(), result.node_sets.end());
        for (const auto& inst : pm.instances) {
            std::vector<std::uint32_t> set;
            for (const auto& id : inst) set.push_back(*g.find(id));
            std::sort(set.begin(), set.end());
            CHECK(found.count(set) == 1);
        }
    }
}

TEST_CASE("motif reports compute priorities over the firm union") {
    auto m = Motif::from_edges(3, {{0, 1}, {1, 2}});
    std::vector<graph::FirmFinancials> fin(6);
    for (int i = 0; i < 4; ++i) fin[i] = {true, 19.5, 19.5};
    auto r = motif_report(m, {{0, 1, 2}, {1, 2, 3}}, fin);
    CHECK(r.instance_count == 2);
    CHECK(r.covered_firms == 4);
    CHECK(r.default_firms == 4);
    CHECK(r.priority == doctest::Approx(1.0));
    CHECK(*r.ratio_default_amount == doctest::Approx(1.0));
    CHECK(r.total_loan_amount == doctest::Approx(78));
    CHECK(to_json(r)["priority"] == 1.0);

    auto lower = motif_report(m, {{0, 1, 2}, {1, 2, 3}, {3, 4, 5}}, fin);
    CHECK(lower.priority < r.priority);
    CHECK(lower.priority >= 0.0);
    auto none = motif_report(m, {{4, 5, 0}}, std::vector<graph::FirmFinancials>(6));
    CHECK(none.priority == 0.0);
    CHECK_FALSE(none.ratio_default_amount);
}

TEST_CASE("motif ranking orders by priority deterministically") {
    auto classes = enumerate_motif_classes(4);
    auto report = [&](int cls, int firms, int defaults) {
        MotifReport r;
        r.motif = classes[cls];
        r.covered_firms = firms;
        r.default_firms = defaults;
        r.priority = static_cast<double>(defaults) / firms;
        return r;
    };
    std::vector<MotifReport> in{report(20, 4, 3), report(19, 4, 4), report(15, 10, 9)};
    auto ranked = rank_motifs(in);
    CHECK(ranked[0].motif == classes[19]);
    CHECK(ranked[1].motif == classes[15]);
    CHECK(ranked[2].motif == classes[20]);

    std::mt19937_64 rng(53);
    std::vector<MotifReport> many;
    for (int i = 0; i < 30; ++i) many.push_back(report(i, 4, static_cast<int>(rng() % 5)));
    auto expected = rank_motifs(many);
    for (int t = 0; t < 10; ++t) {
        std::shuffle(many.begin(), many.end(), rng);
        auto again = rank_motifs(many);
        for (std::size_t i = 0; i < again.size(); ++i) CHECK(again[i].motif == expected[i].motif);
    }
    std::vector<MotifReport> equal{report(7, 4, 2), report(3, 4, 2), report(5, 4, 2)};
    auto eq = rank_motifs(equal);
    CHECK(eq[0].motif < eq[1].motif);
    CHECK(eq[1].motif < eq[2].motif);
    auto csv = reports_to_csv(ranked);
    CHECK(std::count(csv.begin(), csv.end(), '\n') >= 3);
}

TEST_CASE("motif edits change shapes and undo cleanly") {
    auto cycle = Motif::from_edges(3, {{0, 1}, {1, 2}, {2, 0}});
    auto grown = edit_motif(cycle, {MotifEdit::Kind::add_node, 0, -1});
    CHECK(grown.motif.k() == 4);
    CHECK(grown.motif.code() != cycle.code());
    CHECK(grown.slot_map.size() == 4);

    auto path = Motif::from_edges(3, {{0, 1}, {1, 2}});
    auto code = error_code([&] {
        auto e = path.edges()[0];
        edit_motif(path, {MotifEdit::Kind::remove_edge, e.first, e.second});
    });
    CHECK(code == "DisconnectedResult");

    auto e = cycle.edges()[0];
    auto removed = edit_motif(cycle, {MotifEdit::Kind::remove_edge, e.first, e.second});
    CHECK(removed.motif.k() == 3);
    auto restored = edit_motif(removed.motif, {MotifEdit::Kind::add_edge, removed.slot_map[e.first], removed.slot_map[e.second]});
    CHECK(restored.motif == cycle);

    CHECK(error_code([&] { edit_motif(cycle, {MotifEdit::Kind::add_edge, 0, 0}); }) == "InvalidEdit");
    auto big = Motif::from_edges(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}});
    CHECK(error_code([&] { edit_motif(big, {MotifEdit::Kind::add_node, 0, -1}); }) == "SizeCapExceeded");
    MotifEdit op{MotifEdit::Kind::add_node, -1, 2};
    auto back = motif_edit_from_json(to_json(op));
    CHECK(back.kind == op.kind);
    CHECK(back.from == -1);
    CHECK(back.to == 2);
}
