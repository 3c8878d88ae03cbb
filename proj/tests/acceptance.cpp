// Acceptance runner: one PASS/FAIL line per criterion, each with its own time limit.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <set>
#include <string>

#include "glens/community.hpp"
#include "glens/contagion.hpp"
#include "glens/error.hpp"
#include "glens/financials.hpp"
#include "glens/ingest.hpp"
#include "glens/metrics.hpp"
#include "glens/patterns.hpp"
#include "glens/risk.hpp"
#include "glens/service.hpp"
#include "support.hpp"

using namespace glens;
using graph::SimpleEdge;
using graph::SimpleGraph;
using graph::ViewMode;
using nlohmann::json;
using testing::D;

namespace {

// Collects the first failed expectation of a criterion.
struct Check {
    std::string failure;
    void expect(bool ok, const std::string& what) {
        if (!ok && failure.empty()) failure = what;
    }
};

int failures = 0;

void criterion(const std::string& name, double limit_seconds, const std::function<void(Check&)>& body) {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.expect(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.failure.empty() && secs > limit_seconds) c.failure = "over the time limit";
    bool pass = c.failure.empty();
    if (!pass) ++failures;
    std::printf("%s  %-28s %8.2fs / %.0fs%s%s\n", pass ? "PASS" : "FAIL", name.c_str(), secs, limit_seconds,
                pass ? "" : "  ", c.failure.c_str());
    std::fflush(stdout);
}

SimpleGraph whole_graph(const graph::GuaranteeNetwork& net) {
    std::vector<SimpleEdge> edges;
    for (graph::EdgeIndex e = 0; e < net.edges().size(); ++e)
        edges.push_back({net.guarantor_index(e), net.borrower_index(e), 1.0});
    return SimpleGraph::from_edges(net.enterprise_ids(), edges, ViewMode::directed);
}

void motif_classes(Check& c) {
    const std::size_t expected[] = {13, 199, 9364};
    for (int k = 3; k <= 5; ++k) {
        auto classes = patterns::enumerate_motif_classes(k);
        c.expect(classes.size() == expected[k - 3], "k=" + std::to_string(k) + " gave " + std::to_string(classes.size()));
    }
}

void overall_default_rate(Check& c) {
    ingest::TableSet t;
    t.customer_profile.push_back({"C1", D(2013, 1, 1), "private", 100, "small", 5, "retail"});
    const int repayments = 87307, defaults = 5911, per_contract = 100;
    int written = 0;
    for (int k = 0; written < repayments; ++k) {
        std::string id = "L" + std::to_string(k);
        t.loan_contract.push_back({id, "C1", 1000, D(2013, 1, 1), "equal", "monthly"});
        for (int i = 1; i <= per_contract && written < repayments; ++i, ++written) {
            Date due = add_days(D(2013, 1, 1), i);
            if (written < defaults) t.repayment_status.push_back({id, i, due, 10, std::nullopt, 0});
            else t.repayment_status.push_back({id, i, due, 10, due, 10});
        }
    }
    auto s = ingest::overall_stats(t);
    c.expect(s.repayment_count == repayments, "repayment count");
    c.expect(s.default_count == defaults, "default count " + std::to_string(s.default_count));
    c.expect(s.default_rate_per_repayment && std::fabs(*s.default_rate_per_repayment * 100 - 6.77) <= 0.01,
             "rate outside 6.77% +- 0.01pp");
}

void community_table(Check& c) {
    // Community 1: 44 firms, 14 defaulted, loans 1071 of which 733 defaulted. Community 2: 48 of 48.
    std::vector<SimpleEdge> edges;
    for (std::uint32_t i = 1; i < 44; ++i) edges.push_back({0, i, 1.0});
    for (std::uint32_t i = 45; i < 92; ++i) edges.push_back({44, i, 1.0});
    auto g = SimpleGraph::from_edges(std::size_t{92}, edges, ViewMode::undirected);
    std::vector<community::Label> labels(92, 1);
    std::fill(labels.begin() + 44, labels.end(), 2);
    community::Partition p(g.ids(), labels);
    std::vector<graph::FirmFinancials> fin(92);
    for (int i = 0; i < 14; ++i) fin[i] = {true, 0.0, 0.0};
    fin[0] = {true, 733, 733};
    fin[20].loan_amount = 338;
    for (int i = 44; i < 92; ++i) fin[i] = {true, 10.0, 10.0};
    auto stats = community::community_stats(p, g, fin);
    c.expect(stats.size() == 2, "two communities");
    auto a = community::to_json(stats.at(0)), b = community::to_json(stats.at(1));
    c.expect(a["ratio_default_firms_pct"] == 32, "14/44 -> 32%");
    c.expect(a["ratio_default_amount_pct"] == 68, "733/1071 -> 68%");
    c.expect(b["ratio_default_firms_pct"] == 100, "48/48 -> 100%");
}

void motif_ranking(Check& c) {
    auto classes = patterns::enumerate_motif_classes(4);
    auto report = [&](int cls, int firms, int defaults) {
        std::vector<graph::FirmFinancials> fin(static_cast<std::size_t>(firms));
        for (int i = 0; i < defaults; ++i) fin[static_cast<std::size_t>(i)] = {true, 1.0, 1.0};
        std::vector<std::vector<std::uint32_t>> sets;
        for (std::uint32_t base = 0; base + 4 <= static_cast<std::uint32_t>(firms); base += 3)
            sets.push_back({base, base + 1, base + 2, base + 3});
        return patterns::motif_report(classes[static_cast<std::size_t>(cls)], sets, fin);
    };
    auto ranked = patterns::rank_motifs({report(20, 4, 3), report(19, 4, 4), report(15, 10, 9)});
    c.expect(ranked.size() == 3, "three reports");
    c.expect(std::lround(ranked[0].priority * 100) == 100 && ranked[0].motif == classes[19], "19 first at 100");
    c.expect(std::lround(ranked[1].priority * 100) == 90 && ranked[1].motif == classes[15], "15 second at 90");
    c.expect(std::lround(ranked[2].priority * 100) == 75 && ranked[2].motif == classes[20], "20 third at 75");
}

void centrality_oracles(Check& c) {
    std::mt19937_64 rng(2718);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 2 + static_cast<int>(rng() % 49);
        auto g = testing::random_digraph(rng, n, (1.0 + static_cast<double>(rng() % 40) / 10.0) / n);
        auto bt = metrics::betweenness(g), ob = testing::brute_betweenness(g);
        auto cl = metrics::closeness(g), oc = testing::brute_closeness(g);
        auto pr = metrics::pagerank(g), op = testing::dense_pagerank(g);
        for (int v = 0; v < n; ++v) {
            c.expect(std::fabs(bt[v] - ob[v]) < 1e-9, "betweenness trial " + std::to_string(trial));
            c.expect(std::fabs(cl[v] - oc[v]) < 1e-9, "closeness trial " + std::to_string(trial));
            c.expect(std::fabs(pr[v] - op[v]) < 1e-9, "pagerank trial " + std::to_string(trial));
        }
        c.expect(metrics::kshell(g) == testing::peel_cores(g), "k-shell trial " + std::to_string(trial));
        auto h = metrics::hits(g);
        c.expect(testing::hits_residual(g, h.hub, h.authority) < 1e-8, "hits trial " + std::to_string(trial));
    }
}

void pattern_oracles(Check& c) {
    std::mt19937_64 rng(314);
    for (int trial = 0; trial < 40; ++trial) {
        int n = 3 + static_cast<int>(rng() % 10);
        auto g = testing::random_digraph(rng, n, 0.1 + static_cast<double>(rng() % 20) / 100.0);
        const int max_len = 6;
        auto cycles = patterns::simple_cycles(g, max_len, 1'000'000);
        std::set<std::vector<std::uint32_t>> got(cycles.begin(), cycles.end());
        c.expect(got.size() == cycles.size() && got == testing::brute_cycles(g, max_len), "cycles trial " + std::to_string(trial));
        for (int k = 3; k <= 4; ++k) {
            auto oracle = testing::brute_subgraphs(g, k);
            auto census = patterns::motif_census(g, k);
            c.expect(census.classes.size() == oracle.size(), "census class count");
            for (const auto& entry : census.classes) {
                auto it = oracle.find(testing::iso_key(k, entry.motif.edges()));
                if (it == oracle.end()) {
                    c.expect(false, "census class missing from oracle");
                    continue;
                }
                c.expect(entry.count == static_cast<std::int64_t>(it->second.size()), "census count");
                auto expected = it->second;
                std::sort(expected.begin(), expected.end());
                c.expect(patterns::match_motif(g, entry.motif).node_sets == expected, "match embeddings");
            }
        }
    }
}

void contagion_example(Check& c) {
    auto g = testing::named_digraph({"A", "B", "C", "D", "E", "F", "G", "H"},
                                    {{"B", "A"}, {"C", "B"}, {"D", "B"}, {"E", "C"}, {"E", "D"}, {"E", "F"}, {"E", "G"}, {"E", "H"}});
    std::set<std::string> got;
    for (auto v : contagion::contagion_set(g, "A")) got.insert(g.id(v));
    c.expect(got == std::set<std::string>{"B", "C", "D", "E"}, "contagion set of A");
    for (const char* x : {"F", "G", "H"}) c.expect(!got.count(x), std::string("contains ") + x);
}

// Mutates one record dated at or after `cutoff`.
void mutate_after(ingest::TableSet& t, Date cutoff, std::mt19937_64& rng, int probe) {
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    auto later = [&] { return add_days(cutoff, static_cast<int>(rng() % 200)); };
    const auto& customer = t.customer_profile[pick(t.customer_profile.size())].customer_id;
    std::string tag = std::to_string(probe);
    switch (rng() % 7) {
        case 0: {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < t.repayment_status.size(); ++i)
                if (t.repayment_status[i].due_date >= cutoff) idx.push_back(i);
            if (idx.empty()) break;
            auto& r = t.repayment_status[idx[pick(idx.size())]];
            if (r.paid_date) {
                r.paid_date.reset();
                r.paid_amount = 0;
            } else {
                r.paid_date = add_days(r.due_date, 45);
                r.paid_amount = r.due_amount;
            }
            break;
        }
        case 1:
        case 2: {
            Date start = later();
            std::string id = "LX" + tag;
            t.loan_contract.push_back({id, customer, 500, start, "equal", "monthly"});
            for (int i = 1; i <= 3; ++i)
                t.repayment_status.push_back({id, i, add_months(start, i), 100, std::nullopt, 0});
            if (rng() % 2) {
                const auto& guarantor = t.customer_profile[pick(t.customer_profile.size())].customer_id;
                if (guarantor != customer) {
                    t.guarantee_relationship.push_back({"GX" + tag, guarantor, customer, id});
                    t.guarantee_contract.push_back({"GX" + tag, 300, start, add_months(start, 6)});
                }
            }
            break;
        }
        case 3: t.default_status.push_back({customer, later(), "default"}); break;
        case 4: t.customer_credit.push_back({customer, later(), static_cast<int>(rng() % 10)}); break;
        case 5: t.loan_account.push_back({customer, "AX" + tag, later(), 1e6}); break;
        default: t.customer_profile.push_back({customer, later(), "state", 9e6, "large", 9999, "mutated"}); break;
    }
}

struct WindowState {
    std::vector<risk::FeatureVector> train_rows, cutoff_rows;
    std::vector<int> labels;
    std::string model;
};

bool same(const std::vector<risk::FeatureVector>& a, const std::vector<risk::FeatureVector>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].enterprise != b[i].enterprise || a[i].categorical != b[i].categorical) return false;
        if (a[i].numeric.size() != b[i].numeric.size() ||
            std::memcmp(a[i].numeric.data(), b[i].numeric.data(), a[i].numeric.size() * sizeof(double)) != 0)
            return false;
    }
    return true;
}

WindowState window_state(const graph::GuaranteeNetwork& net, const risk::WindowTuple& w) {
    WindowState s;
    risk::FeatureExtractor train(net, w.train.end);
    for (auto n : train.population()) {
        s.train_rows.push_back(train.extract(n));
        s.labels.push_back(risk::label_defaults(net, n, w.observe) ? 1 : 0);
    }
    risk::FeatureExtractor at(net, w.observe.end);
    for (auto n : at.population()) s.cutoff_rows.push_back(at.extract(n));
    risk::BoostParams params;
    params.trees = 30;
    s.model = risk::train_on_features(s.train_rows, s.labels, params).fingerprint();
    return s;
}

void leakage(Check& c) {
    ingest::SyntheticConfig cfg;
    cfg.seed = 21;
    auto base = ingest::generate_synthetic(cfg).tables;
    auto net = ingest::join_to_network(base);
    auto plan = risk::build_windows(*net.date_span());
    // Windows whose training set holds both classes.
    std::vector<risk::WindowTuple> windows;
    std::vector<WindowState> baseline;
    for (const auto& w : plan.tuples) {
        try {
            baseline.push_back(window_state(net, w));
            windows.push_back(w);
        } catch (const Error& e) {
            if (e.code() != "DegenerateLabels") throw;
        }
    }
    c.expect(windows.size() >= 3, "fewer than three trainable windows");
    if (windows.empty()) return;
    std::mt19937_64 rng(99);
    for (int probe = 0; probe < 50; ++probe) {
        std::size_t w = static_cast<std::size_t>(rng() % windows.size());
        auto tables = base;
        mutate_after(tables, windows[w].observe.end, rng, probe);
        auto state = window_state(ingest::join_to_network(tables), windows[w]);
        std::string where = " (probe " + std::to_string(probe) + ")";
        c.expect(same(state.train_rows, baseline[w].train_rows), "training features changed" + where);
        c.expect(same(state.cutoff_rows, baseline[w].cutoff_rows), "cutoff features changed" + where);
        c.expect(state.labels == baseline[w].labels, "labels changed" + where);
        c.expect(state.model == baseline[w].model, "model fingerprint changed" + where);
    }
    // Control: a missed installment before the cutoff must show up.
    auto tables = base;
    for (auto& r : tables.repayment_status)
        if (r.due_date < windows.back().train.end && r.paid_date) {
            r.paid_date.reset();
            r.paid_amount = 0;
        }
    c.expect(!same(window_state(ingest::join_to_network(tables), windows.back()).train_rows, baseline.back().train_rows),
             "earlier records do not reach the features");
}

void boosting(Check& c) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0, 1);
    for (int d = 0; d < 20; ++d) {
        risk::Matrix x;
        std::vector<int> y;
        std::size_t cols = 2 + rng() % 6;
        for (int i = 0; i < 300; ++i) {
            std::vector<double> r(cols);
            for (auto& v : r) v = u(rng) < 0.05 ? std::nan("") : u(rng);
            x.push_row(r);
            double signal = std::isnan(r[0]) ? 0.5 : r[0];
            y.push_back(u(rng) < 0.15 + 0.5 * signal ? 1 : 0);
        }
        risk::BoostParams p;
        p.trees = 40;
        p.max_depth = 1 + static_cast<int>(rng() % 4);
        p.gamma = static_cast<double>(rng() % 3) * 0.1;
        risk::TrainingTrace trace;
        risk::train(x, y, p, &trace);
        for (std::size_t i = 1; i < trace.objective.size(); ++i)
            c.expect(trace.objective[i] <= trace.objective[i - 1], "objective rose on dataset " + std::to_string(d));

        p.lambda = 1e9;
        auto heavy = risk::train(x, y, p);
        for (const auto& t : heavy.trees())
            for (const auto& node : t.nodes)
                if (node.feature < 0) c.expect(std::fabs(node.weight) < 1e-6, "leaf above 1e-6 with lambda 1e9");
    }

    ingest::SyntheticConfig cfg;
    cfg.seed = 7;
    cfg.community_count = 16;
    cfg.community_size_min = 30;
    cfg.community_size_max = 40;
    cfg.background_default_rate = 0.005;
    cfg.seed_fraction = 0.1;
    cfg.propagation_probability = 0.3;
    auto net = ingest::join_to_network(ingest::generate_synthetic(cfg).tables);
    auto plan = risk::build_windows(*net.date_span(), 3, 3);
    risk::RollingOptions opts;
    opts.params.min_child_weight = 30;
    auto planted = risk::rolling_predict(net, plan, opts);
    c.expect(planted.mean_auc && *planted.mean_auc > 0.80, "planted mean AUC not above 0.80");
    double total = 0;
    const int shuffles = 6;
    for (int s = 0; s < shuffles; ++s) {
        auto o = opts;
        o.shuffle_labels_seed = 100 + s;
        auto r = risk::rolling_predict(net, plan, o);
        c.expect(r.mean_auc.has_value(), "shuffled run without AUC");
        total += r.mean_auc.value_or(0.0);
    }
    double shuffled = total / shuffles;
    c.expect(shuffled >= 0.45 && shuffled <= 0.55, "shuffled control mean outside [0.45, 0.55]");
    std::printf("      planted mean AUC %.3f, shuffled control %.3f\n", planted.mean_auc.value_or(0.0), shuffled);
}

void edit_replay(Check& c) {
    ingest::SyntheticConfig cfg;
    cfg.seed = 8;
    auto data = service::make_dataset(ingest::generate_synthetic(cfg).tables, "synthetic");
    const auto& net = data->network;
    auto snap = graph::snapshot(net, service::default_snapshot_date(net));
    auto und = graph::simple_view(net, snap, ViewMode::undirected);
    auto dir = graph::simple_view(net, snap, ViewMode::directed);
    const auto initial = community::detect_communities(und);
    auto p = initial;
    contagion::CutSession cuts(dir);
    std::vector<json> log;
    std::mt19937_64 rng(30);

    for (int attempt = 0; log.size() < 30 && attempt < 10000; ++attempt) {
        json op;
        switch (rng() % 4) {
            case 0: {
                auto sp = community::find_spanners(p, und);
                if (sp.empty()) continue;
                const auto& s = sp[rng() % sp.size()];
                op = {{"op", "merge"}, {"a", p.label(s.node)}, {"b", *s.foreign.begin()}};
                break;
            }
            case 1: {
                auto sp = community::find_spanners(p, und);
                if (sp.empty()) continue;
                const auto& s = sp[rng() % sp.size()];
                op = {{"op", "reassign"}, {"node", und.id(s.node)}, {"target", *s.foreign.rbegin()}};
                break;
            }
            case 2: {
                // A node with one neighbour inside its community splits off along that edge.
                std::uint32_t v = static_cast<std::uint32_t>(rng() % und.size());
                std::vector<std::uint32_t> inside;
                for (const auto& nb : und.out(v))
                    if (p.label(nb.node) == p.label(v)) inside.push_back(nb.node);
                if (inside.size() != 1) continue;
                op = {{"op", "split"}, {"community", p.label(v)}, {"cut", {{und.id(v), und.id(inside[0])}}}};
                break;
            }
            default: {
                const auto& e = dir.edges()[rng() % dir.edges().size()];
                op = {{"op", "cut"}, {"guarantor", dir.id(e.u)}, {"borrower", dir.id(e.v)}};
                break;
            }
        }
        try {
            if (op["op"] == "cut") cuts.apply_cut(op["guarantor"], op["borrower"]);
            else p = community::apply_edit(p, und, community::edit_from_json(op));
            log.push_back(op);
        } catch (const Error&) {
        }
    }
    c.expect(log.size() == 30, "could not draw 30 operations");

    std::vector<community::EditOp> partition_log;
    for (const auto& op : log)
        if (op["op"] != "cut") partition_log.push_back(community::edit_from_json(op));
    c.expect(community::replay(initial, und, partition_log).fingerprint() == p.fingerprint(), "library replay");

    service::Engine engine(data);
    auto call = [&](const std::string& method, const std::string& path, const json& body = nullptr) {
        service::Request r{method, path, {}, body.is_null() ? "" : body.dump()};
        return engine.handle(r);
    };
    std::vector<json> finals;
    for (int run = 0; run < 2; ++run) {
        std::string sid = call("POST", "/api/v1/sessions", json::object()).body["session"];
        json last;
        for (const auto& op : log) {
            auto r = call("POST", "/api/v1/sessions/" + sid + "/edits", op);
            c.expect(r.status == 200, "engine rejected " + op.dump());
            last = r.body;
        }
        auto state = call("GET", "/api/v1/sessions/" + sid).body;
        c.expect(state["partition"]["fingerprint"] == p.fingerprint(), "engine partition fingerprint");
        finals.push_back(state);
    }
    c.expect(finals[0]["fingerprint"] == finals[1]["fingerprint"], "session fingerprints differ");
    c.expect(finals[0]["partition"] == finals[1]["partition"], "partitions differ");

    contagion::CutSession again(dir);
    for (const auto& op : log)
        if (op["op"] == "cut") again.apply_cut(op["guarantor"], op["borrower"]);
    c.expect(again.fingerprint() == cuts.fingerprint(), "cut fingerprint");
    for (std::uint32_t v = 0; v < dir.size(); v += 7)
        c.expect(contagion::fingerprint(again.paths(dir.id(v)), dir) == contagion::fingerprint(cuts.paths(dir.id(v)), dir),
                 "propagation fingerprint");
}

void planted_recovery(Check& c) {
    for (std::uint64_t seed : {2u, 3u, 5u}) {
        ingest::SyntheticConfig cfg;
        cfg.seed = seed;
        cfg.mutual_pairs = 4;
        cfg.revolving_cycles = 4;
        cfg.stars = 4;
        cfg.joint_liability = 4;
        cfg.motifs = ingest::feed_forward_library(2);
        auto data = ingest::generate_synthetic(cfg);
        auto net = ingest::join_to_network(data.tables);
        auto g = whole_graph(net);
        auto idx = [&](const std::string& id) { return *g.find(id); };
        c.expect(!data.truth.mutual_pairs.empty() && !data.truth.revolving_cycles.empty() && !data.truth.stars.empty() &&
                     !data.truth.joint_liability.empty(),
                 "generator planted nothing");

        patterns::CircleOptions opts;
        opts.max_cycle_len = cfg.revolving_max_len;
        opts.max_cycles = 10'000'000;
        opts.star_min_borrowers = cfg.star_min_borrowers;
        opts.joint_min_guarantors = cfg.joint_min_guarantors;
        auto r = patterns::detect_circles(g, opts);
        c.expect(!r.partial, "circle detection stopped early");

        std::set<std::vector<std::uint32_t>> cycles;
        for (const auto& x : r.mutual) cycles.insert(x.members);
        for (const auto& x : r.revolving) cycles.insert(x.members);
        auto rotated = [&](std::vector<std::string> ids) {
            std::vector<std::uint32_t> v;
            for (const auto& id : ids) v.push_back(idx(id));
            std::rotate(v.begin(), std::min_element(v.begin(), v.end()), v.end());
            return v;
        };
        for (const auto& [a, b] : data.truth.mutual_pairs) c.expect(cycles.count(rotated({a, b})), "mutual pair missed");
        for (const auto& cyc : data.truth.revolving_cycles) c.expect(cycles.count(rotated(cyc)), "revolving cycle missed");

        auto covers = [&](const std::vector<patterns::GuaranteeCircle>& found, const std::string& hub,
                          const std::vector<std::string>& spokes) {
            for (const auto& x : found) {
                if (x.members.front() != idx(hub)) continue;
                std::set<std::uint32_t> have(x.members.begin() + 1, x.members.end());
                bool all = true;
                for (const auto& s : spokes) all = all && have.count(idx(s));
                if (all) return true;
            }
            return false;
        };
        for (const auto& [hub, spokes] : data.truth.stars) c.expect(covers(r.star, hub, spokes), "star missed");
        for (const auto& [hub, spokes] : data.truth.joint_liability)
            c.expect(covers(r.joint_liability, hub, spokes), "joint liability set missed");

        c.expect(!data.truth.motifs.empty(), "no planted motifs");
        for (const auto& pm : data.truth.motifs) {
            auto m = patterns::match_motif(g, patterns::Motif::from_edges(pm.k, pm.edges));
            std::set<std::vector<std::uint32_t>> found(m.node_sets.begin(), m.node_sets.end());
            for (const auto& inst : pm.instances) {
                std::vector<std::uint32_t> set;
                for (const auto& id : inst) set.push_back(idx(id));
                std::sort(set.begin(), set.end());
                c.expect(found.count(set), "planted motif instance missed");
            }
        }
    }
}

}  // namespace

int main() {
    criterion("motif-class-enumeration", 60, motif_classes);
    criterion("overall-default-rate", 5, overall_default_rate);
    criterion("community-stats-arithmetic", 5, community_table);
    criterion("motif-priority-ranking", 5, motif_ranking);
    criterion("centrality-oracles", 120, centrality_oracles);
    criterion("circle-census-match-oracles", 120, pattern_oracles);
    criterion("contagion-worked-example", 1, contagion_example);
    criterion("leakage-probes", 60, leakage);
    criterion("boosting-properties", 180, boosting);
    criterion("edit-replay-determinism", 10, edit_replay);
    criterion("planted-structure-recovery", 120, planted_recovery);
    std::printf("%d failed\n", failures);
    return failures == 0 ? 0 : 1;
}
