#include <cstring>
#include <random>

#include "doctest.h"
#include "glens/error.hpp"
#include "glens/ingest.hpp"
#include "glens/risk.hpp"
#include "support.hpp"

using namespace glens;
using namespace glens::risk;
using testing::D;
using testing::NetBuilder;

namespace {

bool bit_identical(const FeatureVector& a, const FeatureVector& b) {
    return a.numeric.size() == b.numeric.size() && a.categorical == b.categorical &&
           std::memcmp(a.numeric.data(), b.numeric.data(), a.numeric.size() * sizeof(double)) == 0;
}

std::size_t column(const std::string& name) {
    const auto& cols = feature_schema().numeric;
    return static_cast<std::size_t>(std::find(cols.begin(), cols.end(), name) - cols.begin());
}

// Two matured loans with one missed installment each (10 and 20), one active loan,
// and a firm whose whole history lies after the cutoff.
NetBuilder history_fixture() {
    NetBuilder b;
    b.firm("A").firm("B").guarantee("B", "A", 50, D(2012, 6, 1));
    b.loan("L1", "A", 30, D(2013, 1, 1), 3).repay_all("L1", {{0, -1}});
    b.loan("L2", "A", 60, D(2013, 1, 1), 3).repay_all("L2", {{0, -1}});
    b.loan("L3", "A", 120, D(2013, 3, 1), 12).repay_all("L3");
    b.loan("L4", "B", 40, D(2013, 5, 15), 4).repay_all("L4");
    return b;
}

Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, std::vector<int>* y) {
    std::uniform_real_distribution<double> u(0, 1);
    Matrix x;
    for (std::size_t i = 0; i < rows; ++i) {
        std::vector<double> r(cols);
        for (auto& v : r) v = u(rng);
        x.push_row(r);
        y->push_back(u(rng) < 0.3 + 0.4 * r[0] ? 1 : 0);
    }
    return x;
}

}  // namespace

TEST_CASE("window plans follow the quarterly protocol") {
    auto one = build_windows({D(2013, 1, 1), D(2013, 10, 1)});
    REQUIRE(one.tuples.size() == 1);
    const auto& w = one.tuples[0];
    CHECK(w.train == DateRange{D(2013, 1, 1), D(2013, 4, 1)});
    CHECK(w.observe == DateRange{D(2013, 4, 1), D(2013, 7, 1)});
    CHECK(w.predict == w.observe);
    CHECK(w.evaluate == DateRange{D(2013, 7, 1), D(2013, 10, 1)});
    CHECK(w.id() == "2013-04-01");

    CHECK(build_windows({D(2013, 1, 1), D(2014, 1, 1)}, 1, 1).tuples.size() == 10);
    auto code = [](auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.code();
        }
        return std::string("none");
    };
    CHECK(code([] { build_windows({D(2013, 1, 1), D(2013, 6, 1)}, 3, 12); }) == "SpanTooShort");
    CHECK(code([] { build_windows({D(2013, 1, 1), D(2013, 6, 1)}); }) == "SpanTooShort");
    CHECK(code([] { build_windows({D(2013, 1, 1), D(2015, 1, 1)}, 0, 3); }) == "InvalidArgument");
    CHECK(to_json(one)["tuples"].size() == 1);
}

TEST_CASE("credit behaviour sums history before the cutoff") {
    auto net = history_fixture().build();
    auto f = extract_features(net, "A", D(2013, 6, 1));
    CHECK(f.numeric[column("past_default_count")] == 2);
    CHECK(f.numeric[column("past_default_amount")] == doctest::Approx(30));
    CHECK(f.numeric[column("past_loan_count")] == 3);
    CHECK(f.numeric[column("active_loan_count")] == 1);
    CHECK(f.numeric[column("active_loan_amount")] == doctest::Approx(120));
    CHECK(f.categorical[4] == "equal");

    auto b = extract_features(net, "B", D(2013, 6, 1));
    CHECK(b.numeric[column("past_default_count")] == 0);
    CHECK(b.numeric[column("past_default_amount")] == 0);
    CHECK(b.numeric[column("past_default_rate")] == 0);
    CHECK(std::isnan(b.numeric[column("deposit_balance")]));

    try {
        extract_features(net, "B", D(2013, 5, 1));
        FAIL("expected NoActiveLoan");
    } catch (const Error& e) {
        CHECK(e.code() == "NoActiveLoan");
    }
    CHECK_THROWS_AS(extract_features(net, "Z", D(2013, 6, 1)), Error);
}

TEST_CASE("records at or after the cutoff never reach the features") {
    const Date cutoff = D(2013, 6, 1);
    auto base = history_fixture().build();
    auto fa = extract_features(base, "A", cutoff), fb = extract_features(base, "B", cutoff);

    std::vector<NetBuilder> probes;
    probes.push_back(history_fixture().loan("L5", "A", 999, D(2013, 6, 1), 2).repay_all("L5", {{0, -1}}));
    probes.push_back(history_fixture().guarantee("A", "B", 77, D(2013, 6, 1)));
    probes.push_back(history_fixture().guarantee("A", "B", 77, D(2013, 7, 1)));
    NetBuilder late;
    late.firm("A").firm("B").guarantee("B", "A", 50, D(2012, 6, 1));
    late.loan("L1", "A", 30, D(2013, 1, 1), 3).repay_all("L1", {{0, -1}});
    late.loan("L2", "A", 60, D(2013, 1, 1), 3).repay_all("L2", {{0, -1}});
    // Installments due after the cutoff change outcome.
    late.loan("L3", "A", 120, D(2013, 3, 1), 12).repay_all("L3", {{4, -1}, {5, 90}, {8, -1}});
    late.loan("L4", "B", 40, D(2013, 5, 15), 4).repay_all("L4", {{0, -1}, {1, -1}});
    probes.push_back(late);
    for (const auto& p : probes) {
        auto net = p.build();
        CHECK(bit_identical(extract_features(net, "A", cutoff), fa));
        CHECK(bit_identical(extract_features(net, "B", cutoff), fb));
    }
    // A record before the cutoff does change them.
    auto earlier = history_fixture().loan("L6", "A", 5, D(2013, 2, 1), 1).repay_all("L6", {{0, -1}}).build();
    CHECK_FALSE(bit_identical(extract_features(earlier, "A", cutoff), fa));
}

TEST_CASE("labels honour the grace period") {
    auto net = NetBuilder()
                   .firms({"A", "B", "C"})
                   .loan("L1", "A", 30, D(2013, 1, 1), 3)
                   .repay_all("L1", {{1, 5}})
                   .loan("L2", "B", 30, D(2013, 1, 1), 3)
                   .repay_all("L2")
                   .loan("L3", "C", 30, D(2013, 1, 1), 3)
                   .repay_all("L3", {{1, -1}})
                   .build();
    DateRange q{D(2013, 1, 1), D(2013, 4, 1)};
    auto a = net.index_of("A"), b = net.index_of("B"), c = net.index_of("C");
    CHECK(label_defaults(net, a, q, 0));
    CHECK_FALSE(label_defaults(net, a, q, 30));
    CHECK_FALSE(label_defaults(net, b, q, 0));
    CHECK(label_defaults(net, c, q, 0));
    CHECK(label_defaults(net, c, q, 30));
    CHECK_FALSE(label_defaults(net, c, {D(2013, 4, 2), D(2013, 7, 1)}, 0));
}

TEST_CASE("boosting limits and symmetry") {
    Matrix x;
    for (double v : {0.0, 1.0, 2.0, 3.0}) x.push_row({v});
    std::vector<int> y{0, 1, 0, 1};
    BoostParams stump;
    stump.trees = 1;
    stump.max_depth = 0;
    stump.lambda = 0.0;
    auto m = train(x, y, stump);
    for (const auto& t : m.trees()) {
        CHECK(t.nodes.size() == 1);
        CHECK(t.nodes[0].weight == 0.0);
    }
    CHECK(m.predict(x.row(0)) == doctest::Approx(0.5));

    std::mt19937_64 rng(61);
    std::vector<int> ry;
    auto rx = random_matrix(rng, 200, 4, &ry);
    BoostParams heavy;
    heavy.lambda = 1e9;
    heavy.trees = 20;
    auto h = train(rx, ry, heavy);
    for (const auto& t : h.trees())
        for (const auto& nd : t.nodes)
            if (nd.feature < 0) CHECK(std::fabs(nd.weight) < 1e-6);
    for (double p : h.predict(rx)) CHECK(p == doctest::Approx(0.5).epsilon(1e-6));

    BoostParams none;
    none.trees = 0;
    auto empty = train(rx, ry, none);
    CHECK(empty.trees().empty());
    CHECK(empty.predict(rx.row(3)) == 0.5);

    CHECK_THROWS_AS(train(rx, std::vector<int>(200, 1)), Error);
    BoostParams bad;
    bad.lambda = -1;
    CHECK_THROWS_AS(train(rx, ry, bad), Error);
    bad = {};
    bad.min_child_weight = -1;
    CHECK_THROWS_AS(train(rx, ry, bad), Error);
}

TEST_CASE("a separable set trains to a near-perfect ranking") {
    std::mt19937_64 rng(67);
    std::uniform_real_distribution<double> u(-1, 1);
    Matrix x;
    std::vector<int> y;
    for (int i = 0; i < 300; ++i) {
        double a = u(rng), b = u(rng);
        x.push_row({a, b});
        y.push_back(a + 0.5 * b > 0.1 ? 1 : 0);
    }
    BoostParams p;
    p.trees = 50;
    TrainingTrace trace;
    auto m = train(x, y, p, &trace);
    REQUIRE(trace.objective.size() >= 2);
    for (std::size_t i = 1; i < trace.objective.size(); ++i) {
        CHECK(trace.objective[i] <= trace.objective[i - 1]);
        CHECK(trace.loss[i] <= trace.loss[i - 1] + 1e-12);
    }
    CHECK(*auc(m.predict(x), y) >= 0.99);

    // Same data, same model.
    CHECK(train(x, y, p).fingerprint() == m.fingerprint());
}

TEST_CASE("prediction is batch-consistent and models round trip") {
    std::mt19937_64 rng(71);
    std::vector<int> y;
    auto x = random_matrix(rng, 150, 5, &y);
    auto m = train(x, y);
    auto batch = m.predict(x);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        CHECK(batch[i] == m.predict(x.row(i)));
        CHECK(batch[i] >= 0.0);
        CHECK(batch[i] <= 1.0);
    }
    // A single-leaf model predicts the sigmoid of its weight.
    BoostParams one;
    one.trees = 1;
    one.max_depth = 0;
    auto leaf = train(x, y, one);
    if (!leaf.trees().empty()) {
        double w = leaf.trees()[0].nodes[0].weight;
        CHECK(leaf.predict(x.row(0)) == doctest::Approx(1.0 / (1.0 + std::exp(-w))));
    }

    auto back = BoostedModel::from_json(m.to_json());
    CHECK(back.fingerprint() == m.fingerprint());
    CHECK(back.predict(x) == batch);
    auto j = m.to_json();
    j["fingerprint"] = "0000";
    CHECK_THROWS_AS(BoostedModel::from_json(j), Error);

    Matrix narrow;
    narrow.push_row({1.0, 2.0});
    CHECK_THROWS_AS(m.predict(narrow), Error);
}

TEST_CASE("categorical encoders freeze their dictionaries") {
    FeatureVector a, b;
    a.numeric = {1.0};
    a.categorical = {"retail"};
    b.numeric = {2.0};
    b.categorical = {"energy"};
    FeatureSchema schema{{"x"}, {"sector"}};
    auto enc = CategoricalEncoder::fit(schema, {a, b});
    CHECK(enc.encode(b)[1] == 0.0);
    CHECK(enc.encode(a)[1] == 1.0);
    FeatureVector c = a;
    c.categorical = {"mining"};
    CHECK(std::isnan(enc.encode(c)[1]));
    CHECK(CategoricalEncoder::from_json(enc.to_json()).dictionaries() == enc.dictionaries());
}

TEST_CASE("auc and evaluation reports") {
    CHECK(*auc({0.1, 0.2, 0.3, 0.4}, {0, 0, 1, 1}) == 1.0);
    CHECK(*auc({0.5, 0.5, 0.5}, {0, 1, 0}) == 0.5);
    CHECK_FALSE(auc({0.1, 0.2}, {1, 1}));
    auto r = evaluate("w", {0.9, 0.6, 0.2, 0.1}, {1, 0, 1, 0});
    CHECK(r.true_positive == 1);
    CHECK(r.false_positive == 1);
    CHECK(r.false_negative == 1);
    CHECK(r.true_negative == 1);
    CHECK(r.true_positive + r.false_positive + r.true_negative + r.false_negative == r.population);
    CHECK(*r.precision == 0.5);
    CHECK(*r.auc == 0.75);
    CHECK(to_json(r)["confusion"]["tp"] == 1);
}

TEST_CASE("a three-tuple rolling run yields three reports") {
    ingest::SyntheticConfig cfg;
    cfg.seed = 7;
    cfg.seed_fraction = 0.1;
    cfg.propagation_probability = 0.3;
    cfg.background_default_rate = 0.005;
    auto net = ingest::join_to_network(ingest::generate_synthetic(cfg).tables);
    auto plan = build_windows({D(2013, 4, 1), D(2014, 7, 1)});
    REQUIRE(plan.tuples.size() == 3);
    auto r = rolling_predict(net, plan);
    CHECK(r.reports.size() == 3);
    CHECK(r.warnings.empty());
    for (const auto& rep : r.reports) {
        CHECK(rep.true_positive + rep.false_positive + rep.true_negative + rep.false_negative == rep.population);
        if (rep.auc) CHECK((*rep.auc >= 0.0 && *rep.auc <= 1.0));
    }
    auto again = rolling_predict(net, plan);
    CHECK(to_json(again) == to_json(r));
    CHECK(predictions_to_csv(r.predictions).rfind("enterprise,window_end,probability\n", 0) == 0);

    std::atomic<bool> flag{true};
    JobControl cancelled;
    cancelled.cancel = &flag;
    auto stopped = rolling_predict(net, plan, {}, cancelled);
    CHECK(stopped.reports.empty());
    CHECK_FALSE(stopped.warnings.empty());
}
