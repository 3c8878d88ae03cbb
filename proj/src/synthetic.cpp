#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>
#include <random>
#include <set>
#include <unordered_set>

#include "glens/error.hpp"
#include "glens/ingest.hpp"

namespace glens::ingest {

namespace {

// Portable draws on top of mt19937_64 (std distributions are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    bool chance(double p) { return uniform() < p; }

    // Inclusive range.
    std::int64_t integer(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return lo + static_cast<std::int64_t>(x % span);
    }

    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    template <class T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(integer(0, static_cast<std::int64_t>(v.size()) - 1))];
    }

private:
    std::mt19937_64 engine_;
};

std::string make_id(char prefix, std::int64_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%07lld", prefix, static_cast<long long>(n));
    return buf;
}

double cents(double v) { return std::round(v * 100.0) / 100.0; }

const std::vector<std::string> kSectors = {"manufacturing", "textile",   "chemicals", "construction",
                                           "trading",       "logistics", "metals",    "services"};
const std::vector<std::string> kNatures = {"private", "state", "collective", "foreign"};
const std::vector<std::string> kCapitalReturn = {"equal_installment", "bullet", "equal_principal"};
const std::vector<std::string> kInterestReturn = {"monthly", "quarterly", "at_maturity"};
const std::vector<std::string> kGuarantorTypes = {"enterprise", "group", "associate"};

bool weakly_connected(int k, const std::vector<std::pair<int, int>>& edges) {
    std::vector<int> parent(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) parent[static_cast<std::size_t>(i)] = i;
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
        return x;
    };
    for (auto [a, b] : edges) parent[static_cast<std::size_t>(find(a))] = find(b);
    for (int i = 1; i < k; ++i)
        if (find(i) != find(0)) return false;
    return true;
}

}  // namespace

std::vector<MotifTemplate> feed_forward_library(int count_each) {
    return {
        {"ff_diamond", 4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}}, count_each},
        {"ff_chain_shortcut", 4, {{0, 1}, {1, 2}, {2, 3}, {0, 2}}, count_each},
        {"ff_dense", 4, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}}, count_each},
    };
}

void SyntheticConfig::validate() const {
    auto infeasible = [](const std::string& why) { throw Error("InfeasibleConfig", why); };
    if (community_count < 1) infeasible("community_count must be positive");
    if (community_size_min < 1 || community_size_max < community_size_min) infeasible("bad community size range");
    for (double d : {intra_density, inter_density, seed_fraction, propagation_probability, background_default_rate,
                     post_onset_default_rate})
        if (!(d >= 0.0 && d <= 1.0)) infeasible("densities and probabilities must lie in [0,1]");
    if (revolving_min_len < 3 || revolving_max_len < revolving_min_len) infeasible("revolving cycles need length >= 3");
    if (star_min_borrowers < 3 || star_max_borrowers < star_min_borrowers) infeasible("stars need >= 3 borrowers");
    if (joint_min_guarantors < 2 || joint_max_guarantors < joint_min_guarantors)
        infeasible("joint liability needs >= 2 guarantors");
    if (mutual_pairs < 0 || revolving_cycles < 0 || stars < 0 || joint_liability < 0)
        infeasible("planted counts must be non-negative");
    if (!(span_begin < span_end)) infeasible("empty date span");
    for (const auto& m : motifs) {
        if (m.k < 2) infeasible("motif '" + m.name + "' needs at least 2 nodes");
        if (m.k > community_size_max)
            infeasible("motif '" + m.name + "' has " + std::to_string(m.k) + " nodes, larger than any community");
        for (auto [a, b] : m.edges)
            if (a < 0 || b < 0 || a >= m.k || b >= m.k || a == b) infeasible("motif '" + m.name + "' has a bad edge");
        if (!weakly_connected(m.k, m.edges)) infeasible("motif '" + m.name + "' is not weakly connected");
    }
}

SyntheticConfig config_from_json(const nlohmann::json& j) {
    SyntheticConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("community_count", c.community_count);
    get("community_size_min", c.community_size_min);
    get("community_size_max", c.community_size_max);
    get("intra_density", c.intra_density);
    get("inter_density", c.inter_density);
    get("edge_budget", c.edge_budget);
    get("mutual_pairs", c.mutual_pairs);
    get("revolving_cycles", c.revolving_cycles);
    get("revolving_min_len", c.revolving_min_len);
    get("revolving_max_len", c.revolving_max_len);
    get("stars", c.stars);
    get("star_min_borrowers", c.star_min_borrowers);
    get("star_max_borrowers", c.star_max_borrowers);
    get("joint_liability", c.joint_liability);
    get("joint_min_guarantors", c.joint_min_guarantors);
    get("joint_max_guarantors", c.joint_max_guarantors);
    get("seed_fraction", c.seed_fraction);
    get("propagation_probability", c.propagation_probability);
    get("background_default_rate", c.background_default_rate);
    get("post_onset_default_rate", c.post_onset_default_rate);
    get("seed", c.seed);
    get("seed_ids", c.seed_ids);
    if (j.contains("span_begin")) c.span_begin = date_from_string(j.at("span_begin").get<std::string>());
    if (j.contains("span_end")) c.span_end = date_from_string(j.at("span_end").get<std::string>());
    if (j.contains("motifs")) {
        c.motifs.clear();
        for (const auto& m : j.at("motifs")) {
            MotifTemplate t;
            t.name = m.value("name", "motif");
            t.k = m.at("k").get<int>();
            for (const auto& e : m.at("edges")) t.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
            t.count = m.value("count", 1);
            c.motifs.push_back(std::move(t));
        }
    }
    c.validate();
    return c;
}

nlohmann::json to_json(const SyntheticConfig& c) {
    nlohmann::json motifs = nlohmann::json::array();
    for (const auto& m : c.motifs) motifs.push_back({{"name", m.name}, {"k", m.k}, {"edges", m.edges}, {"count", m.count}});
    return {{"community_count", c.community_count},
            {"community_size_min", c.community_size_min},
            {"community_size_max", c.community_size_max},
            {"intra_density", c.intra_density},
            {"inter_density", c.inter_density},
            {"edge_budget", c.edge_budget},
            {"mutual_pairs", c.mutual_pairs},
            {"revolving_cycles", c.revolving_cycles},
            {"revolving_min_len", c.revolving_min_len},
            {"revolving_max_len", c.revolving_max_len},
            {"stars", c.stars},
            {"star_min_borrowers", c.star_min_borrowers},
            {"star_max_borrowers", c.star_max_borrowers},
            {"joint_liability", c.joint_liability},
            {"joint_min_guarantors", c.joint_min_guarantors},
            {"joint_max_guarantors", c.joint_max_guarantors},
            {"motifs", motifs},
            {"seed_fraction", c.seed_fraction},
            {"seed_ids", c.seed_ids},
            {"propagation_probability", c.propagation_probability},
            {"background_default_rate", c.background_default_rate},
            {"post_onset_default_rate", c.post_onset_default_rate},
            {"span_begin", to_string(c.span_begin)},
            {"span_end", to_string(c.span_end)},
            {"seed", c.seed}};
}

nlohmann::json to_json(const GroundTruth& g) {
    nlohmann::json j;
    j["seed"] = g.seed;
    j["communities"] = g.communities;
    j["mutual_pairs"] = nlohmann::json::array();
    for (const auto& [a, b] : g.mutual_pairs) j["mutual_pairs"].push_back({a, b});
    j["revolving_cycles"] = g.revolving_cycles;
    j["stars"] = nlohmann::json::array();
    for (const auto& [hub, leaves] : g.stars) j["stars"].push_back({{"guarantor", hub}, {"borrowers", leaves}});
    j["joint_liability"] = nlohmann::json::array();
    for (const auto& [b, gs] : g.joint_liability) j["joint_liability"].push_back({{"borrower", b}, {"guarantors", gs}});
    j["motifs"] = nlohmann::json::array();
    for (const auto& m : g.motifs)
        j["motifs"].push_back({{"name", m.name}, {"k", m.k}, {"edges", m.edges}, {"instances", m.instances}});
    j["cascade"] = nlohmann::json::array();
    for (const auto& c : g.cascade)
        j["cascade"].push_back({{"id", c.id}, {"onset", to_string(c.onset)}, {"seed", c.seed}, {"source", c.source}});
    j["counts"] = {{"customers", g.customer_count},
                   {"relations", g.relation_count},
                   {"contracts", g.contract_count},
                   {"repayments", g.repayment_count},
                   {"default_repayments", g.default_repayment_count}};
    return j;
}

SyntheticData generate_synthetic(const SyntheticConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    SyntheticData out;
    TableSet& t = out.tables;
    GroundTruth& truth = out.truth;
    truth.seed = cfg.seed;

    // Communities and enterprises.
    std::vector<std::vector<int>> communities;
    std::vector<int> community_of;
    int n = 0;
    for (int c = 0; c < cfg.community_count; ++c) {
        int size = static_cast<int>(rng.integer(cfg.community_size_min, cfg.community_size_max));
        std::vector<int> members;
        for (int i = 0; i < size; ++i) {
            members.push_back(n++);
            community_of.push_back(c);
        }
        communities.push_back(std::move(members));
    }
    std::vector<std::string> ids(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = make_id('E', i + 1);
    for (const auto& members : communities) {
        std::vector<std::string> names;
        for (int v : members) names.push_back(ids[static_cast<std::size_t>(v)]);
        truth.communities.push_back(std::move(names));
    }

    // Planted structures take disjoint nodes, assigned round-robin over communities.
    std::vector<std::size_t> next_free(communities.size(), 0);
    std::vector<int> group_of(static_cast<std::size_t>(n), -1);
    int group_count = 0;
    std::size_t rr = 0;
    auto reserve = [&](int k, const std::string& what) {
        for (std::size_t tries = 0; tries < communities.size(); ++tries) {
            std::size_t c = (rr + tries) % communities.size();
            if (communities[c].size() - next_free[c] >= static_cast<std::size_t>(k)) {
                std::vector<int> nodes(communities[c].begin() + static_cast<std::ptrdiff_t>(next_free[c]),
                                       communities[c].begin() + static_cast<std::ptrdiff_t>(next_free[c]) + k);
                next_free[c] += static_cast<std::size_t>(k);
                rr = c + 1;
                for (int v : nodes) group_of[static_cast<std::size_t>(v)] = group_count;
                ++group_count;
                return nodes;
            }
        }
        throw Error("InfeasibleConfig", "not enough free community members to plant " + what);
    };

    struct RawEdge {
        int g, b;
        bool planted;
    };
    std::vector<RawEdge> raw;
    std::set<std::pair<int, int>> used_pairs;  // unordered
    auto add_edge = [&](int g, int b, bool planted) {
        raw.push_back({g, b, planted});
        used_pairs.insert({std::min(g, b), std::max(g, b)});
    };

    for (int i = 0; i < cfg.mutual_pairs; ++i) {
        auto v = reserve(2, "a mutual guarantee");
        add_edge(v[0], v[1], true);
        add_edge(v[1], v[0], true);
        truth.mutual_pairs.emplace_back(ids[static_cast<std::size_t>(v[0])], ids[static_cast<std::size_t>(v[1])]);
    }
    for (int i = 0; i < cfg.revolving_cycles; ++i) {
        int len = static_cast<int>(rng.integer(cfg.revolving_min_len, cfg.revolving_max_len));
        auto v = reserve(len, "a revolving guarantee");
        std::vector<std::string> names;
        for (int j = 0; j < len; ++j) {
            add_edge(v[static_cast<std::size_t>(j)], v[static_cast<std::size_t>((j + 1) % len)], true);
            names.push_back(ids[static_cast<std::size_t>(v[static_cast<std::size_t>(j)])]);
        }
        truth.revolving_cycles.push_back(std::move(names));
    }
    for (int i = 0; i < cfg.stars; ++i) {
        int leaves = static_cast<int>(rng.integer(cfg.star_min_borrowers, cfg.star_max_borrowers));
        auto v = reserve(leaves + 1, "a star guarantee");
        std::vector<std::string> names;
        for (int j = 1; j <= leaves; ++j) {
            add_edge(v[0], v[static_cast<std::size_t>(j)], true);
            names.push_back(ids[static_cast<std::size_t>(v[static_cast<std::size_t>(j)])]);
        }
        truth.stars.emplace_back(ids[static_cast<std::size_t>(v[0])], std::move(names));
    }
    for (int i = 0; i < cfg.joint_liability; ++i) {
        int gs = static_cast<int>(rng.integer(cfg.joint_min_guarantors, cfg.joint_max_guarantors));
        auto v = reserve(gs + 1, "a joint liability guarantee");
        std::vector<std::string> names;
        for (int j = 1; j <= gs; ++j) {
            add_edge(v[static_cast<std::size_t>(j)], v[0], true);
            names.push_back(ids[static_cast<std::size_t>(v[static_cast<std::size_t>(j)])]);
        }
        truth.joint_liability.emplace_back(ids[static_cast<std::size_t>(v[0])], std::move(names));
    }
    for (const auto& m : cfg.motifs) {
        PlantedMotif pm{m.name, m.k, m.edges, {}};
        for (int i = 0; i < m.count; ++i) {
            auto v = reserve(m.k, "motif '" + m.name + "'");
            for (auto [a, b] : m.edges) add_edge(v[static_cast<std::size_t>(a)], v[static_cast<std::size_t>(b)], true);
            std::vector<std::string> names;
            for (int x : v) names.push_back(ids[static_cast<std::size_t>(x)]);
            pm.instances.push_back(std::move(names));
        }
        truth.motifs.push_back(std::move(pm));
    }

    // Random wiring never creates a second edge on a pair (so no accidental 2-cycles)
    // and never wires two members of the same planted group together.
    auto try_random = [&](int g, int b) {
        if (g == b) return false;
        if (group_of[static_cast<std::size_t>(g)] >= 0 &&
            group_of[static_cast<std::size_t>(g)] == group_of[static_cast<std::size_t>(b)])
            return false;
        if (used_pairs.count({std::min(g, b), std::max(g, b)})) return false;
        add_edge(g, b, false);
        return true;
    };
    for (const auto& members : communities) {
        const auto s = static_cast<std::int64_t>(members.size());
        if (s < 2) continue;
        auto target = static_cast<std::int64_t>(std::llround(cfg.intra_density * static_cast<double>(s * (s - 1))));
        std::int64_t added = 0;
        for (std::int64_t attempts = 0; added < target && attempts < target * 50 + 100; ++attempts) {
            int g = members[static_cast<std::size_t>(rng.integer(0, s - 1))];
            int b = members[static_cast<std::size_t>(rng.integer(0, s - 1))];
            if (try_random(g, b)) ++added;
        }
    }
    if (communities.size() > 1) {
        std::int64_t target;
        if (cfg.edge_budget > 0) {
            target = cfg.edge_budget - static_cast<std::int64_t>(raw.size());
            if (target < 0) throw Error("InfeasibleConfig", "edge budget smaller than planted and intra-community edges");
        } else {
            double cross = 0.0;
            for (const auto& members : communities)
                cross += static_cast<double>(members.size()) * static_cast<double>(n - static_cast<int>(members.size()));
            target = std::llround(cfg.inter_density * cross);
        }
        std::int64_t added = 0;
        for (std::int64_t attempts = 0; added < target && attempts < target * 50 + 100; ++attempts) {
            int g = static_cast<int>(rng.integer(0, n - 1));
            int b = static_cast<int>(rng.integer(0, n - 1));
            if (community_of[static_cast<std::size_t>(g)] == community_of[static_cast<std::size_t>(b)]) continue;
            if (try_random(g, b)) ++added;
        }
        if (cfg.edge_budget > 0 && added < target)
            throw Error("InfeasibleConfig", "edge budget exceeds the number of distinct guarantor pairs available");
    }

    // Latent fragility drives seeding and credit ratings. Firms that need many guarantors
    // are the weaker ones, so half of it is the percentile of the guarantor count.
    std::vector<std::set<int>> backers(static_cast<std::size_t>(n));
    for (const auto& e : raw) backers[static_cast<std::size_t>(e.b)].insert(e.g);
    std::vector<std::size_t> backer_counts;
    for (const auto& b : backers) backer_counts.push_back(b.size());
    std::sort(backer_counts.begin(), backer_counts.end());
    std::vector<double> fragility(static_cast<std::size_t>(n));
    std::vector<double> capital(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto c = backers[static_cast<std::size_t>(i)].size();
        auto lo = std::lower_bound(backer_counts.begin(), backer_counts.end(), c) - backer_counts.begin();
        auto hi = std::upper_bound(backer_counts.begin(), backer_counts.end(), c) - backer_counts.begin();
        const double percentile = n > 1 ? (static_cast<double>(lo + hi - 1) / 2.0) / static_cast<double>(n - 1) : 0.5;
        fragility[static_cast<std::size_t>(i)] = 0.5 * rng.uniform() + 0.5 * percentile;
        capital[static_cast<std::size_t>(i)] = cents(std::exp(4.0 + 0.8 * rng.normal()));
    }

    // Default cascade: seeds default first, then spread borrower -> guarantor.
    const auto span_days = (cfg.span_end - cfg.span_begin).count();
    std::vector<std::vector<int>> guarantors_of(static_cast<std::size_t>(n));
    for (const auto& e : raw) guarantors_of[static_cast<std::size_t>(e.b)].push_back(e.g);
    for (auto& l : guarantors_of) {
        std::sort(l.begin(), l.end());
        l.erase(std::unique(l.begin(), l.end()), l.end());
    }
    std::vector<std::optional<Date>> onset(static_cast<std::size_t>(n));
    std::vector<std::string> source(static_cast<std::size_t>(n));
    std::vector<char> is_seed(static_cast<std::size_t>(n), 0);
    using Item = std::pair<std::int64_t, int>;  // (onset day, node)
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    const std::int64_t first_onset = std::min<std::int64_t>(90, span_days / 4);
    const std::set<std::string> explicit_seeds(cfg.seed_ids.begin(), cfg.seed_ids.end());
    for (const auto& s : explicit_seeds)
        if (!std::binary_search(ids.begin(), ids.end(), s))
            throw Error("InfeasibleConfig", "seed id '" + s + "' is not a generated enterprise");
    for (int i = 0; i < n; ++i) {
        const bool seeded = explicit_seeds.empty()
                                ? rng.chance(std::min(1.0, cfg.seed_fraction * 2.0 * fragility[static_cast<std::size_t>(i)]))
                                : explicit_seeds.count(ids[static_cast<std::size_t>(i)]) > 0;
        if (seeded) {
            Date d = add_days(cfg.span_begin, static_cast<int>(rng.integer(first_onset, std::max<std::int64_t>(first_onset, span_days - 1))));
            onset[static_cast<std::size_t>(i)] = d;
            is_seed[static_cast<std::size_t>(i)] = 1;
            queue.push({d.time_since_epoch().count(), i});
        }
    }
    std::vector<char> done(static_cast<std::size_t>(n), 0);
    while (!queue.empty()) {
        auto [day, u] = queue.top();
        queue.pop();
        if (done[static_cast<std::size_t>(u)]) continue;
        done[static_cast<std::size_t>(u)] = 1;
        for (int g : guarantors_of[static_cast<std::size_t>(u)]) {
            if (!rng.chance(cfg.propagation_probability)) continue;
            std::int64_t when = day + rng.integer(30, 120);
            auto& cur = onset[static_cast<std::size_t>(g)];
            if (!done[static_cast<std::size_t>(g)] && (!cur || cur->time_since_epoch().count() > when)) {
                cur = Date{std::chrono::days{when}};
                source[static_cast<std::size_t>(g)] = ids[static_cast<std::size_t>(u)];
                queue.push({when, g});
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        if (onset[static_cast<std::size_t>(i)])
            truth.cascade.push_back({ids[static_cast<std::size_t>(i)], *onset[static_cast<std::size_t>(i)],
                                     is_seed[static_cast<std::size_t>(i)] != 0, source[static_cast<std::size_t>(i)]});
    }
    std::stable_sort(truth.cascade.begin(), truth.cascade.end(),
                     [](const CascadeEntry& a, const CascadeEntry& b) { return a.onset < b.onset; });

    // Profiles, ratings, deposits, statuses.
    for (int i = 0; i < n; ++i) {
        const auto& id = ids[static_cast<std::size_t>(i)];
        const double cap = capital[static_cast<std::size_t>(i)];
        const double f = fragility[static_cast<std::size_t>(i)];
        const auto& on = onset[static_cast<std::size_t>(i)];
        int c = community_of[static_cast<std::size_t>(i)];
        std::string sector = rng.chance(0.7) ? kSectors[static_cast<std::size_t>(c) % kSectors.size()] : rng.pick(kSectors);
        auto scale_of = [](double v) { return v < 30 ? "micro" : (v < 150 ? "small" : "medium"); };
        auto employees = static_cast<std::int64_t>(std::llround(cap * rng.uniform(0.5, 2.0))) + 1;
        t.customer_profile.push_back({id, add_days(cfg.span_begin, -400), rng.pick(kNatures), cap, scale_of(cap),
                                      employees, sector});
        if (rng.chance(0.5)) {
            double cap2 = cents(cap * rng.uniform(0.8, 1.2));
            t.customer_profile.push_back({id, add_days(cfg.span_begin, static_cast<int>(rng.integer(0, span_days - 1))),
                                          t.customer_profile.back().business_nature, cap2, scale_of(cap2),
                                          std::max<std::int64_t>(1, employees + rng.integer(-5, 5)), sector});
        }
        for (Date d = add_months(cfg.span_begin, -3); d < cfg.span_end; d = add_months(d, 3)) {
            int rating = 1 + static_cast<int>(std::lround(6.0 * f + rng.normal()));
            if (on && d >= add_days(*on, -90)) rating += 3;
            t.customer_credit.push_back({id, d, std::clamp(rating, 1, 10)});
        }
        const double base = cap * rng.uniform(0.1, 0.4);
        for (Date d = add_months(cfg.span_begin, -12); d < cfg.span_end; d = add_months(d, 1)) {
            double bal = base * rng.uniform(0.9, 1.1);
            if (on && d >= add_days(*on, -180)) {
                double months = static_cast<double>((d - add_days(*on, -180)).count()) / 30.0;
                bal *= std::pow(0.85, months);
            }
            t.loan_account.push_back({id, make_id('A', i + 1), d, cents(bal)});
        }
        t.default_status.push_back({id, cfg.span_begin, "normal"});
        if (on && add_days(*on, 30) < cfg.span_end) t.default_status.push_back({id, add_days(*on, 30), "default"});
    }

    // Loan contracts chained across the span with quarterly installments.
    std::vector<std::vector<std::size_t>> contracts_of(static_cast<std::size_t>(n));
    std::int64_t contract_no = 0;
    for (int i = 0; i < n; ++i) {
        const auto& id = ids[static_cast<std::size_t>(i)];
        const auto& on = onset[static_cast<std::size_t>(i)];
        Date start = add_days(cfg.span_begin, -static_cast<int>(rng.integer(0, 80)));
        while (true) {
            int term = rng.chance(0.5) ? 12 : 6;
            int installments = term / 3;
            if (!(add_months(start, 3) < cfg.span_end)) break;
            double amount = cents(capital[static_cast<std::size_t>(i)] * rng.uniform(0.3, 1.2)) + 1.0;
            std::string cid = make_id('L', ++contract_no);
            contracts_of[static_cast<std::size_t>(i)].push_back(t.loan_contract.size());
            t.loan_contract.push_back({cid, id, amount, start, rng.pick(kCapitalReturn), rng.pick(kInterestReturn)});
            double due_amount = cents(amount * 1.05 / installments);
            for (int k = 1; k <= installments; ++k) {
                Date due = add_months(start, 3 * k);
                if (!(due < cfg.span_end)) break;
                RepaymentStatusRow row{cid, k, due, due_amount, std::nullopt, 0.0};
                bool defaulted;
                if (on && due >= *on) defaulted = rng.chance(cfg.post_onset_default_rate);
                else defaulted = rng.chance(cfg.background_default_rate);
                if (defaulted) {
                    if (on && due >= *on && rng.chance(0.6)) {
                        row.paid_date = std::nullopt;
                    } else {
                        row.paid_date = add_days(due, static_cast<int>(rng.integer(5, 60)));
                        row.paid_amount = due_amount;
                    }
                    ++truth.default_repayment_count;
                } else {
                    row.paid_date = add_days(due, -static_cast<int>(rng.integer(0, 10)));
                    row.paid_amount = due_amount;
                }
                t.repayment_status.push_back(row);
            }
            start = add_months(start, term - static_cast<int>(rng.integer(0, 2)));
        }
    }

    // Guarantee relations.
    std::int64_t gno = 0;
    std::vector<char> is_guarantor(static_cast<std::size_t>(n), 0);
    for (const auto& e : raw) {
        std::string gid = make_id('G', ++gno);
        const auto& borrower_contracts = contracts_of[static_cast<std::size_t>(e.b)];
        std::string loan = borrower_contracts.empty() ? std::string()
                                                      : t.loan_contract[rng.pick(borrower_contracts)].contract_id;
        t.guarantee_relationship.push_back({gid, ids[static_cast<std::size_t>(e.g)], ids[static_cast<std::size_t>(e.b)], loan});
        double amount = cents(capital[static_cast<std::size_t>(e.b)] * rng.uniform(0.2, 1.0)) + 1.0;
        GuaranteeContractRow row{gid, amount, cfg.span_begin, std::nullopt};
        if (!e.planted) {
            row.valid_from = add_days(cfg.span_begin, static_cast<int>(rng.integer(-120, span_days * 6 / 10)));
            if (rng.chance(0.7)) row.valid_to = add_months(*row.valid_from, static_cast<int>(rng.integer(12, 30)));
        }
        t.guarantee_contract.push_back(row);
        is_guarantor[static_cast<std::size_t>(e.g)] = 1;
    }
    for (int i = 0; i < n; ++i)
        if (is_guarantor[static_cast<std::size_t>(i)])
            t.guarantee_profile.push_back({ids[static_cast<std::size_t>(i)], rng.pick(kGuarantorTypes)});

    truth.customer_count = n;
    truth.relation_count = static_cast<std::int64_t>(t.guarantee_relationship.size());
    truth.contract_count = static_cast<std::int64_t>(t.loan_contract.size());
    truth.repayment_count = static_cast<std::int64_t>(t.repayment_status.size());
    return out;
}

}  // namespace glens::ingest
