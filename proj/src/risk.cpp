#include "glens/risk.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "glens/error.hpp"
#include "glens/hash.hpp"

namespace glens::risk {

namespace {
constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
}

// ---- windows ------------------------------------------------------------------------------

WindowPlan build_windows(DateRange span, int width_months, int stride_months) {
    if (width_months < 1 || stride_months < 1) throw Error("InvalidArgument", "window width and stride must be positive");
    if (span.end <= span.begin) throw Error("SpanTooShort", "date span is empty");
    std::chrono::year_month_day ymd{span.begin};
    Date start = make_date(static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()), 1);
    if (start < span.begin) start = add_months(start, 1);
    if (width_months == 3) {
        while ((static_cast<unsigned>(std::chrono::year_month_day{start}.month()) - 1) % 3 != 0)
            start = add_months(start, 1);
    }
    WindowPlan plan;
    plan.width_months = width_months;
    plan.stride_months = stride_months;
    for (int t = 0;; ++t) {
        Date b = add_months(start, t * stride_months);
        WindowTuple w;
        w.train = {b, add_months(b, width_months)};
        w.observe = {w.train.end, add_months(b, 2 * width_months)};
        w.predict = w.observe;
        w.evaluate = {w.observe.end, add_months(b, 3 * width_months)};
        if (w.evaluate.end > span.end) break;
        plan.tuples.push_back(w);
    }
    if (plan.tuples.empty())
        throw Error("SpanTooShort",
                    "span " + to_string(span.begin) + " to " + to_string(span.end) +
                        " cannot hold train, observe and evaluate windows of " + std::to_string(width_months) +
                        " months");
    return plan;
}

nlohmann::json to_json(const WindowPlan& plan) {
    auto range = [](const DateRange& r) { return nlohmann::json{{"begin", to_string(r.begin)}, {"end", to_string(r.end)}}; };
    nlohmann::json tuples = nlohmann::json::array();
    for (const auto& t : plan.tuples)
        tuples.push_back({{"id", t.id()},
                          {"train", range(t.train)},
                          {"observe", range(t.observe)},
                          {"predict", range(t.predict)},
                          {"evaluate", range(t.evaluate)}});
    return {{"width_months", plan.width_months}, {"stride_months", plan.stride_months}, {"tuples", tuples}};
}

// ---- features ---------------------------------------------------------------------------------

std::vector<std::string> FeatureSchema::columns() const {
    std::vector<std::string> out = numeric;
    out.insert(out.end(), categorical.begin(), categorical.end());
    return out;
}

const FeatureSchema& feature_schema() {
    static const FeatureSchema schema{
        {"registered_capital", "employee_count", "credit_rating", "deposit_balance", "deposit_change_3m",
         "past_loan_count", "past_loan_amount", "past_default_count", "past_default_amount", "past_default_rate",
         "active_loan_count", "active_loan_amount", "hub", "authority", "pagerank", "kshell", "eigenvector",
         "betweenness", "closeness"},
        {"business_nature", "enterprise_scale", "sector", "guarantor_type", "capital_return_type",
         "interest_return_type"}};
    return schema;
}

bool active_loan(const graph::LoanContract& c, Date cutoff) { return c.start_date < cutoff && c.maturity() >= cutoff; }

FeatureExtractor::FeatureExtractor(const graph::GuaranteeNetwork& net, Date cutoff, int grace_days)
    : net_(net), cutoff_(cutoff), grace_days_(grace_days) {
    for (graph::NodeIndex n = 0; n < net.node_count(); ++n) {
        for (auto c : net.contracts_of(n)) {
            if (active_loan(net.contracts()[c], cutoff)) {
                population_.push_back(n);
                break;
            }
        }
    }
    auto snap = graph::snapshot(net, add_days(cutoff, -1));
    if (!snap.nodes.empty()) {
        auto view = graph::simple_view(net, snap, graph::ViewMode::directed);
        auto values = metrics::compute_centralities(view);
        for (std::uint32_t v = 0; v < view.size(); ++v) metrics_.emplace(view.global()[v], values[v]);
    }
}

FeatureVector FeatureExtractor::extract(graph::NodeIndex n) const {
    const auto& e = net_.enterprise(n);
    FeatureVector f;
    f.enterprise = e.id;
    f.cutoff = cutoff_;
    f.numeric.assign(feature_schema().numeric.size(), kMissing);
    f.categorical.assign(feature_schema().categorical.size(), std::string{});
    auto& x = f.numeric;

    if (const auto* p = e.profile_before(cutoff_)) {
        x[0] = p->registered_capital;
        x[1] = static_cast<double>(p->employee_count);
        f.categorical[0] = p->business_nature;
        f.categorical[1] = p->enterprise_scale;
        f.categorical[2] = p->sector;
    }
    f.categorical[3] = e.guarantor_type;
    if (auto r = e.rating_before(cutoff_)) x[2] = *r;

    auto balance_before = [&](Date d) -> std::optional<double> {
        std::optional<double> v;
        for (const auto& rec : e.deposits) {
            if (rec.as_of >= d) break;
            v = rec.balance;
        }
        return v;
    };
    auto now = balance_before(cutoff_);
    auto then = balance_before(add_months(cutoff_, -3));
    if (now) x[3] = *now;
    if (now && then && *then > 0.0) x[4] = (*now - *then) / *then;

    double loans = 0, loan_amount = 0, defaults = 0, default_amount = 0, decided = 0, active = 0, active_amount = 0;
    const graph::LoanContract* latest_active = nullptr;
    for (auto ci : net_.contracts_of(n)) {
        const auto& c = net_.contracts()[ci];
        if (c.start_date >= cutoff_) continue;
        loans += 1;
        loan_amount += c.loan_amount;
        if (active_loan(c, cutoff_)) {
            active += 1;
            active_amount += c.loan_amount;
            if (!latest_active || c.start_date >= latest_active->start_date) latest_active = &c;
        }
        for (auto ri : net_.repayments_of_contract(ci)) {
            const auto& r = net_.repayments()[ri];
            if (add_days(r.due_date, grace_days_) >= cutoff_) continue;
            decided += 1;
            if (r.known_default_before(cutoff_, grace_days_)) {
                defaults += 1;
                default_amount += r.due_amount;
            }
        }
    }
    if (!latest_active)
        throw Error("NoActiveLoan", "enterprise '" + e.id + "' has no active loan at " + to_string(cutoff_), e.id);
    x[5] = loans;
    x[6] = loan_amount;
    x[7] = defaults;
    x[8] = default_amount;
    x[9] = decided > 0 ? defaults / decided : 0.0;
    x[10] = active;
    x[11] = active_amount;
    f.categorical[4] = latest_active->capital_return_type;
    f.categorical[5] = latest_active->interest_return_type;

    auto it = metrics_.find(n);
    const metrics::NodeMetrics m = it != metrics_.end() ? it->second : metrics::NodeMetrics{};
    x[12] = m.hub;
    x[13] = m.authority;
    x[14] = m.pagerank;
    x[15] = m.kshell;
    x[16] = m.eigenvector;
    x[17] = m.betweenness;
    x[18] = m.closeness;
    return f;
}

FeatureVector extract_features(const graph::GuaranteeNetwork& net, const std::string& enterprise, Date cutoff,
                               int grace_days) {
    auto n = net.index_of(enterprise);
    return FeatureExtractor(net, cutoff, grace_days).extract(n);
}

bool label_defaults(const graph::GuaranteeNetwork& net, graph::NodeIndex n, DateRange window, int grace_days) {
    for (auto ci : net.contracts_of(n))
        for (auto ri : net.repayments_of_contract(ci)) {
            const auto& r = net.repayments()[ri];
            if (window.contains(r.due_date) && r.is_default(grace_days)) return true;
        }
    return false;
}

CategoricalEncoder CategoricalEncoder::fit(const FeatureSchema& schema, const std::vector<FeatureVector>& rows) {
    CategoricalEncoder enc;
    enc.dictionaries_.resize(schema.categorical.size());
    for (std::size_t c = 0; c < schema.categorical.size(); ++c) {
        std::set<std::string> values;
        for (const auto& r : rows)
            if (!r.categorical.at(c).empty()) values.insert(r.categorical[c]);
        int code = 0;
        for (const auto& v : values) enc.dictionaries_[c][v] = code++;
    }
    return enc;
}

std::vector<double> CategoricalEncoder::encode(const FeatureVector& row) const {
    if (row.categorical.size() != dictionaries_.size())
        throw Error("SchemaMismatch", "row has " + std::to_string(row.categorical.size()) +
                                          " categorical features, encoder expects " +
                                          std::to_string(dictionaries_.size()));
    std::vector<double> out = row.numeric;
    for (std::size_t c = 0; c < dictionaries_.size(); ++c) {
        auto it = dictionaries_[c].find(row.categorical[c]);
        out.push_back(it == dictionaries_[c].end() ? kMissing : it->second);
    }
    return out;
}

nlohmann::json CategoricalEncoder::to_json() const { return dictionaries_; }

CategoricalEncoder CategoricalEncoder::from_json(const nlohmann::json& j) {
    CategoricalEncoder enc;
    enc.dictionaries_ = j.get<std::vector<std::map<std::string, int>>>();
    return enc;
}

// ---- boosted trees -------------------------------------------------------------------------------

void Matrix::push_row(const std::vector<double>& r) {
    if (cols == 0 && values.empty()) cols = r.size();
    if (r.size() != cols) throw Error("SchemaMismatch", "row width differs from matrix width");
    values.insert(values.end(), r.begin(), r.end());
}

nlohmann::json BoostParams::to_json() const {
    nlohmann::json j{{"trees", trees},
                     {"max_depth", max_depth},
                     {"learning_rate", learning_rate},
                     {"gamma", gamma},
                     {"lambda", lambda},
                     {"min_child_weight", min_child_weight}};
    j["positive_weight"] = positive_weight ? nlohmann::json(*positive_weight) : nlohmann::json(nullptr);
    return j;
}

BoostParams BoostParams::from_json(const nlohmann::json& j) {
    BoostParams p;
    p.trees = j.value("trees", p.trees);
    p.max_depth = j.value("max_depth", p.max_depth);
    p.learning_rate = j.value("learning_rate", p.learning_rate);
    p.gamma = j.value("gamma", p.gamma);
    p.lambda = j.value("lambda", p.lambda);
    p.min_child_weight = j.value("min_child_weight", p.min_child_weight);
    if (j.contains("positive_weight") && !j["positive_weight"].is_null())
        p.positive_weight = j["positive_weight"].get<double>();
    return p;
}

double Tree::value(const double* row) const {
    int i = 0;
    for (;;) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        if (n.feature < 0) return n.weight;
        double v = row[n.feature];
        bool left = std::isnan(v) ? n.missing_left : v < n.threshold;
        i = left ? n.left : n.right;
    }
}

int Tree::leaf_count() const {
    int c = 0;
    for (const auto& n : nodes) c += n.feature < 0;
    return c;
}

double logistic_loss(const std::vector<double>& margins, const std::vector<int>& y, double positive_weight) {
    double total = 0.0;
    for (std::size_t i = 0; i < margins.size(); ++i) {
        double m = margins[i];
        double softplus = m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
        double l = softplus - (y[i] ? m : 0.0);
        total += (y[i] ? positive_weight : 1.0) * l;
    }
    return total;
}

namespace {

double sigmoid(double m) { return 1.0 / (1.0 + std::exp(-m)); }

struct Presorted {
    std::vector<std::vector<std::uint32_t>> sorted;   // non-missing rows by value
    std::vector<std::vector<std::uint32_t>> missing;  // rows with NaN
};

Presorted presort(const Matrix& x) {
    Presorted p;
    p.sorted.resize(x.cols);
    p.missing.resize(x.cols);
    const auto n = static_cast<std::uint32_t>(x.rows());
    for (std::size_t f = 0; f < x.cols; ++f) {
        for (std::uint32_t r = 0; r < n; ++r) (std::isnan(x.row(r)[f]) ? p.missing[f] : p.sorted[f]).push_back(r);
        std::stable_sort(p.sorted[f].begin(), p.sorted[f].end(),
                         [&](std::uint32_t a, std::uint32_t b) { return x.row(a)[f] < x.row(b)[f]; });
    }
    return p;
}

struct Split {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
    bool missing_left = true;
};

// Exact greedy growth, level by level over presorted columns.
Tree grow_tree(const Matrix& x, const Presorted& ps, const std::vector<double>& g, const std::vector<double>& h,
               const BoostParams& p) {
    const std::size_t n = x.rows();
    Tree tree;
    tree.nodes.emplace_back();
    std::vector<int> pos(n, 0);
    std::vector<double> G{0.0}, H{0.0};
    for (std::size_t r = 0; r < n; ++r) {
        G[0] += g[r];
        H[0] += h[r];
    }
    std::vector<int> open{0};
    auto score = [&](double gs, double hs) { return hs + p.lambda > 0.0 ? gs * gs / (hs + p.lambda) : 0.0; };

    for (int depth = 0; depth < p.max_depth && !open.empty(); ++depth) {
        const std::size_t count = tree.nodes.size();
        std::vector<char> is_open(count, 0);
        for (int o : open) is_open[static_cast<std::size_t>(o)] = 1;
        std::vector<Split> best(count);
        std::vector<double> gm(count), hm(count), gl(count), hl(count), last(count);
        std::vector<std::size_t> seen(count);

        for (std::size_t f = 0; f < x.cols; ++f) {
            std::fill(gm.begin(), gm.end(), 0.0);
            std::fill(hm.begin(), hm.end(), 0.0);
            std::fill(gl.begin(), gl.end(), 0.0);
            std::fill(hl.begin(), hl.end(), 0.0);
            std::fill(seen.begin(), seen.end(), 0);
            for (auto r : ps.missing[f]) {
                auto nd = static_cast<std::size_t>(pos[r]);
                if (!is_open[nd]) continue;
                gm[nd] += g[r];
                hm[nd] += h[r];
            }
            for (auto r : ps.sorted[f]) {
                auto nd = static_cast<std::size_t>(pos[r]);
                if (!is_open[nd]) continue;
                double v = x.row(r)[f];
                if (seen[nd] > 0 && v != last[nd]) {
                    double thr = last[nd] + (v - last[nd]) / 2.0;
                    if (!(thr > last[nd])) thr = v;
                    for (int ml = 1; ml >= 0; --ml) {
                        double gL = gl[nd] + (ml ? gm[nd] : 0.0);
                        double hL = hl[nd] + (ml ? hm[nd] : 0.0);
                        double gR = G[nd] - gL, hR = H[nd] - hL;
                        if (hL < p.min_child_weight || hR < p.min_child_weight) continue;
                        double gain = 0.5 * (score(gL, hL) + score(gR, hR) - score(G[nd], H[nd])) - p.gamma;
                        if (gain > best[nd].gain) best[nd] = {gain, static_cast<int>(f), thr, ml == 1};
                    }
                }
                gl[nd] += g[r];
                hl[nd] += h[r];
                last[nd] = v;
                ++seen[nd];
            }
        }

        std::vector<int> next_open;
        for (int o : open) {
            const auto& s = best[static_cast<std::size_t>(o)];
            if (s.feature < 0) continue;
            int l = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            auto& node = tree.nodes[static_cast<std::size_t>(o)];
            node.feature = s.feature;
            node.threshold = s.threshold;
            node.missing_left = s.missing_left;
            node.left = l;
            node.right = l + 1;
            next_open.push_back(l);
            next_open.push_back(l + 1);
        }
        G.resize(tree.nodes.size(), 0.0);
        H.resize(tree.nodes.size(), 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            const auto& node = tree.nodes[static_cast<std::size_t>(pos[r])];
            if (node.feature < 0) continue;
            double v = x.row(r)[node.feature];
            bool left = std::isnan(v) ? node.missing_left : v < node.threshold;
            pos[r] = left ? node.left : node.right;
            G[static_cast<std::size_t>(pos[r])] += g[r];
            H[static_cast<std::size_t>(pos[r])] += h[r];
        }
        open = std::move(next_open);
    }
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        auto& node = tree.nodes[i];
        if (node.feature >= 0) continue;
        double denom = H[i] + p.lambda;
        node.weight = denom > 0.0 ? p.learning_rate * (-G[i] / denom) : 0.0;
    }
    return tree;
}

double tree_penalty(const Tree& t, const BoostParams& p) {
    double s = 0.0;
    for (const auto& n : t.nodes)
        if (n.feature < 0) s += n.weight * n.weight;
    return p.gamma * t.leaf_count() + 0.5 * p.lambda * s;
}

std::string hash_training(const Matrix& x, const std::vector<int>& y) {
    Fingerprint fp;
    fp.add(static_cast<std::int64_t>(x.cols));
    for (double v : x.values) fp.add(v);
    for (int v : y) fp.add(std::int64_t{v});
    return fp.hex();
}

}  // namespace

BoostedModel train(const Matrix& x, const std::vector<int>& y, const BoostParams& params, TrainingTrace* trace,
                   std::vector<std::string> columns) {
    const std::size_t n = x.rows();
    if (y.size() != n) throw Error("InvalidArgument", "training needs one label per row");
    if (params.trees < 0 || params.max_depth < 0 || !(params.learning_rate > 0.0) || params.lambda < 0.0 ||
        params.gamma < 0.0 || params.min_child_weight < 0.0)
        throw Error("InvalidArgument", "invalid boosting parameters");
    std::size_t pos = 0;
    for (int v : y) {
        if (v != 0 && v != 1) throw Error("InvalidArgument", "labels must be 0 or 1");
        pos += static_cast<std::size_t>(v);
    }
    if (pos == 0 || pos == n)
        throw Error("DegenerateLabels", "training labels need both classes (" + std::to_string(pos) + " positive of " +
                                            std::to_string(n) + ")");
    if (columns.empty())
        for (std::size_t f = 0; f < x.cols; ++f) columns.push_back("f" + std::to_string(f));
    if (columns.size() != x.cols) throw Error("SchemaMismatch", "column names do not match matrix width");

    const double pw = params.positive_weight.value_or(static_cast<double>(n - pos) / static_cast<double>(pos));
    BoostedModel model;
    model.params_ = params;
    model.params_.positive_weight = pw;
    model.columns_ = std::move(columns);
    model.training_fingerprint_ = hash_training(x, y);

    const Presorted ps = presort(x);
    std::vector<double> margin(n, 0.0), g(n), h(n), value(n), trial(n);
    double penalties = 0.0;
    double objective = logistic_loss(margin, y, pw);
    if (trace) {
        trace->objective.assign(1, objective);
        trace->loss.assign(1, objective);
    }
    for (int k = 0; k < params.trees; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            double w = y[i] ? pw : 1.0;
            double p = sigmoid(margin[i]);
            g[i] = w * (p - y[i]);
            h[i] = w * p * (1.0 - p);
        }
        Tree tree = grow_tree(x, ps, g, h, params);
        for (std::size_t i = 0; i < n; ++i) value[i] = tree.value(x.row(i));

        // Halve the step until the regularized objective does not go up.
        bool accepted = false;
        double scale = 1.0, loss = 0.0, penalty = 0.0;
        for (int attempt = 0; attempt <= 10 && !accepted; ++attempt, scale *= 0.5) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = margin[i] + scale * value[i];
            Tree scaled = tree;
            for (auto& nd : scaled.nodes) nd.weight *= scale;
            loss = logistic_loss(trial, y, pw);
            penalty = tree_penalty(scaled, params);
            if (loss + penalties + penalty <= objective) {
                accepted = true;
                tree = std::move(scaled);
            }
        }
        if (!accepted) break;
        margin.swap(trial);
        penalties += penalty;
        objective = loss + penalties;
        model.trees_.push_back(std::move(tree));
        if (trace) {
            trace->objective.push_back(objective);
            trace->loss.push_back(loss);
        }
    }
    return model;
}

BoostedModel train_on_features(const std::vector<FeatureVector>& rows, const std::vector<int>& y,
                               const BoostParams& params, TrainingTrace* trace) {
    const auto& schema = feature_schema();
    auto encoder = CategoricalEncoder::fit(schema, rows);
    Matrix x;
    x.cols = schema.numeric.size() + schema.categorical.size();
    for (const auto& r : rows) x.push_row(encoder.encode(r));
    BoostedModel model = train(x, y, params, trace, schema.columns());
    model.encoder_ = std::move(encoder);
    return model;
}

double BoostedModel::margin(const double* row) const {
    double s = 0.0;
    for (const auto& t : trees_) s += t.value(row);
    return s;
}

double BoostedModel::predict(const double* row) const { return sigmoid(margin(row)); }

std::vector<double> BoostedModel::predict(const Matrix& x) const {
    if (x.cols != columns_.size())
        throw Error("SchemaMismatch", "matrix has " + std::to_string(x.cols) + " columns, model expects " +
                                          std::to_string(columns_.size()));
    std::vector<double> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict(x.row(i));
    return out;
}

std::vector<double> BoostedModel::predict(const std::vector<FeatureVector>& rows, const FeatureSchema& schema) const {
    if (schema.columns() != columns_) throw Error("SchemaMismatch", "feature schema differs from the training schema");
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        if (r.numeric.size() != schema.numeric.size())
            throw Error("SchemaMismatch", "row for '" + r.enterprise + "' has the wrong numeric width");
        auto enc = encoder_.encode(r);
        out.push_back(predict(enc.data()));
    }
    return out;
}

namespace {

nlohmann::json model_body(const BoostParams& params, const std::vector<std::string>& columns,
                          const CategoricalEncoder& encoder, const std::vector<Tree>& trees,
                          const std::string& training_fp) {
    nlohmann::json jt = nlohmann::json::array();
    for (const auto& t : trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& nd : t.nodes) {
            if (nd.feature < 0) nodes.push_back({{"leaf", nd.weight}});
            else
                nodes.push_back({{"feature", nd.feature},
                                 {"threshold", nd.threshold},
                                 {"missing_left", nd.missing_left},
                                 {"left", nd.left},
                                 {"right", nd.right}});
        }
        jt.push_back({{"nodes", nodes}});
    }
    return {{"format", "glens-boosted-trees"},
            {"version", 1},
            {"params", params.to_json()},
            {"columns", columns},
            {"encoder", encoder.to_json()},
            {"training_fingerprint", training_fp},
            {"trees", jt}};
}

}  // namespace

std::string BoostedModel::fingerprint() const {
    return Fingerprint().add(model_body(params_, columns_, encoder_, trees_, training_fingerprint_).dump()).hex();
}

nlohmann::json BoostedModel::to_json() const {
    auto j = model_body(params_, columns_, encoder_, trees_, training_fingerprint_);
    j["fingerprint"] = fingerprint();
    return j;
}

BoostedModel BoostedModel::from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "glens-boosted-trees" || j.at("version").get<int>() != 1)
            throw Error("InvalidModel", "unsupported model format or version");
        BoostedModel m;
        m.params_ = BoostParams::from_json(j.at("params"));
        m.columns_ = j.at("columns").get<std::vector<std::string>>();
        m.encoder_ = CategoricalEncoder::from_json(j.at("encoder"));
        m.training_fingerprint_ = j.at("training_fingerprint").get<std::string>();
        for (const auto& jt : j.at("trees")) {
            Tree t;
            for (const auto& jn : jt.at("nodes")) {
                TreeNode nd;
                if (jn.contains("leaf")) {
                    nd.weight = jn["leaf"].get<double>();
                } else {
                    nd.feature = jn.at("feature").get<int>();
                    nd.threshold = jn.at("threshold").get<double>();
                    nd.missing_left = jn.at("missing_left").get<bool>();
                    nd.left = jn.at("left").get<int>();
                    nd.right = jn.at("right").get<int>();
                }
                t.nodes.push_back(nd);
            }
            const int size = static_cast<int>(t.nodes.size());
            for (const auto& nd : t.nodes)
                if (nd.feature >= 0 && (nd.feature >= static_cast<int>(m.columns_.size()) || nd.left <= 0 ||
                                        nd.right <= 0 || nd.left >= size || nd.right >= size))
                    throw Error("InvalidModel", "tree node references out of range");
            if (t.nodes.empty()) throw Error("InvalidModel", "empty tree");
            m.trees_.push_back(std::move(t));
        }
        if (j.contains("fingerprint") && j["fingerprint"].get<std::string>() != m.fingerprint())
            throw Error("InvalidModel", "model fingerprint does not match its content");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error("InvalidModel", std::string("malformed model document: ") + e.what());
    }
}

// ---- evaluation -------------------------------------------------------------------------------------

std::optional<double> auc(const std::vector<double>& scores, const std::vector<int>& y) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double pos = 0, rank_sum = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
        double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t)
            if (y[idx[t]]) {
                rank_sum += avg_rank;
                pos += 1;
            }
        i = j;
    }
    double neg = static_cast<double>(n) - pos;
    if (pos == 0 || neg == 0) return std::nullopt;
    return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

EvaluationReport evaluate(const std::string& window, const std::vector<double>& probabilities,
                          const std::vector<int>& y) {
    if (probabilities.size() != y.size()) throw Error("InvalidArgument", "one label per prediction required");
    EvaluationReport r;
    r.window = window;
    r.population = static_cast<int>(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        bool predicted = probabilities[i] >= 0.5;
        if (predicted && y[i]) ++r.true_positive;
        else if (predicted) ++r.false_positive;
        else if (y[i]) ++r.false_negative;
        else ++r.true_negative;
    }
    if (r.true_positive + r.false_positive > 0)
        r.precision = static_cast<double>(r.true_positive) / (r.true_positive + r.false_positive);
    if (r.true_positive + r.false_negative > 0)
        r.recall = static_cast<double>(r.true_positive) / (r.true_positive + r.false_negative);
    r.auc = risk::auc(probabilities, y);
    return r;
}

nlohmann::json to_json(const EvaluationReport& r) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {{"window", r.window},
            {"auc", opt(r.auc)},
            {"precision", opt(r.precision)},
            {"recall", opt(r.recall)},
            {"confusion",
             {{"tp", r.true_positive}, {"fp", r.false_positive}, {"tn", r.true_negative}, {"fn", r.false_negative}}},
            {"population", r.population}};
}

RollingResult rolling_predict(const graph::GuaranteeNetwork& net, const WindowPlan& plan, const RollingOptions& opts,
                              const JobControl& job) {
    RollingResult result;
    const auto& schema = feature_schema();
    double auc_sum = 0.0;
    int auc_count = 0;
    for (std::size_t t = 0; t < plan.tuples.size(); ++t) {
        if (job.cancelled()) {
            result.warnings.push_back("Cancelled before window " + plan.tuples[t].id());
            break;
        }
        const auto& w = plan.tuples[t];
        FeatureExtractor train_fx(net, w.train.end, opts.grace_days);
        std::vector<FeatureVector> rows;
        std::vector<int> labels;
        for (auto n : train_fx.population()) {
            rows.push_back(train_fx.extract(n));
            labels.push_back(label_defaults(net, n, w.observe, opts.grace_days) ? 1 : 0);
        }
        if (opts.shuffle_labels_seed) {
            std::mt19937_64 rng(*opts.shuffle_labels_seed + t);
            for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[rng() % i]);
        }
        BoostedModel model;
        try {
            model = train_on_features(rows, labels, opts.params);
        } catch (const Error& e) {
            if (e.code() != "DegenerateLabels") throw;
            result.warnings.push_back("window " + w.id() + " skipped: DegenerateLabels");
            job.report(static_cast<double>(t + 1) / static_cast<double>(plan.tuples.size()));
            continue;
        }
        FeatureExtractor predict_fx(net, w.predict.end, opts.grace_days);
        std::vector<FeatureVector> scored;
        std::vector<int> truth;
        for (auto n : predict_fx.population()) {
            scored.push_back(predict_fx.extract(n));
            truth.push_back(label_defaults(net, n, w.evaluate, opts.grace_days) ? 1 : 0);
        }
        auto probs = model.predict(scored, schema);
        const Date window_end = add_days(w.predict.end, -1);
        for (std::size_t i = 0; i < scored.size(); ++i)
            result.predictions.push_back({scored[i].enterprise, window_end, probs[i]});
        auto report = evaluate(w.id(), probs, truth);
        if (report.auc) {
            auc_sum += *report.auc;
            ++auc_count;
        }
        result.reports.push_back(std::move(report));
        job.report(static_cast<double>(t + 1) / static_cast<double>(plan.tuples.size()));
    }
    if (auc_count > 0) result.mean_auc = auc_sum / auc_count;
    return result;
}

nlohmann::json to_json(const RollingResult& r) {
    nlohmann::json reports = nlohmann::json::array();
    for (const auto& rep : r.reports) reports.push_back(to_json(rep));
    nlohmann::json preds = nlohmann::json::array();
    for (const auto& c : r.predictions)
        preds.push_back({{"enterprise", c.enterprise}, {"window_end", to_string(c.window_end)}, {"probability", c.probability}});
    return {{"reports", reports},
            {"predictions", preds},
            {"warnings", r.warnings},
            {"mean_auc", r.mean_auc ? nlohmann::json(*r.mean_auc) : nlohmann::json(nullptr)}};
}

std::string predictions_to_csv(const std::vector<metrics::RiskCell>& cells) {
    std::string out = "enterprise,window_end,probability\n";
    char buf[64];
    for (const auto& c : cells) {
        std::snprintf(buf, sizeof buf, ",%.10g\n", c.probability);
        out += c.enterprise + "," + to_string(c.window_end) + buf;
    }
    return out;
}

}  // namespace glens::risk
