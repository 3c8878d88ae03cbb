#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "glens/date.hpp"
#include "glens/graph.hpp"
#include "glens/job.hpp"
#include "glens/metrics.hpp"
#include "json.hpp"

namespace glens::risk {

// ---- windows --------------------------------------------------------------------------

struct WindowTuple {
    DateRange train, observe, predict, evaluate;
    std::string id() const { return to_string(predict.begin); }
};

struct WindowPlan {
    int width_months = 3;
    int stride_months = 3;
    std::vector<WindowTuple> tuples;
};

// Windows start on the first month (quarter for width 3) boundary inside the span, and a
// tuple is kept only when its evaluate window ends inside the span. Errors: SpanTooShort,
// InvalidArgument.
WindowPlan build_windows(DateRange span, int width_months = 3, int stride_months = 3);
nlohmann::json to_json(const WindowPlan& plan);

// ---- features -------------------------------------------------------------------------

struct FeatureSchema {
    std::vector<std::string> numeric;
    std::vector<std::string> categorical;

    // Encoded column order: numeric columns, then categorical ones.
    std::vector<std::string> columns() const;
    bool operator==(const FeatureSchema&) const = default;
};

const FeatureSchema& feature_schema();

// Missing numeric values are NaN; missing categorical values are empty strings.
struct FeatureVector {
    std::string enterprise;
    Date cutoff;
    std::vector<double> numeric;
    std::vector<std::string> categorical;
};

// A loan is active at a cutoff when it started before it and matures on or after it.
bool active_loan(const graph::LoanContract& c, Date cutoff);

// Computes features from records dated strictly before `cutoff`. Network measures come
// from the snapshot on the day before the cutoff and are computed once per extractor.
class FeatureExtractor {
public:
    FeatureExtractor(const graph::GuaranteeNetwork& net, Date cutoff, int grace_days = 0);

    Date cutoff() const { return cutoff_; }
    // Borrowers with at least one active loan at the cutoff, in id order.
    const std::vector<graph::NodeIndex>& population() const { return population_; }
    // Errors: NoActiveLoan.
    FeatureVector extract(graph::NodeIndex n) const;

private:
    const graph::GuaranteeNetwork& net_;
    Date cutoff_;
    int grace_days_;
    std::vector<graph::NodeIndex> population_;
    std::map<graph::NodeIndex, metrics::NodeMetrics> metrics_;
};

// Errors: UnknownEnterprise, NoActiveLoan.
FeatureVector extract_features(const graph::GuaranteeNetwork& net, const std::string& enterprise, Date cutoff,
                               int grace_days = 0);

// True iff an installment of the enterprise due inside the window is unpaid or was paid
// later than due date + grace days.
bool label_defaults(const graph::GuaranteeNetwork& net, graph::NodeIndex n, DateRange window, int grace_days = 0);

// Ordinal dictionaries for categorical features, frozen from one set of rows.
class CategoricalEncoder {
public:
    CategoricalEncoder() = default;
    static CategoricalEncoder fit(const FeatureSchema& schema, const std::vector<FeatureVector>& rows);

    // Unseen and empty values encode as missing (NaN).
    std::vector<double> encode(const FeatureVector& row) const;
    const std::vector<std::map<std::string, int>>& dictionaries() const { return dictionaries_; }

    nlohmann::json to_json() const;
    static CategoricalEncoder from_json(const nlohmann::json& j);

private:
    std::vector<std::map<std::string, int>> dictionaries_;
};

// ---- boosted trees ---------------------------------------------------------------------

// Dense row-major matrix; NaN marks a missing value.
struct Matrix {
    std::size_t cols = 0;
    std::vector<double> values;

    std::size_t rows() const { return cols ? values.size() / cols : 0; }
    const double* row(std::size_t i) const { return values.data() + i * cols; }
    void push_row(const std::vector<double>& r);
};

struct BoostParams {
    int trees = 100;
    int max_depth = 3;
    double learning_rate = 0.1;
    double gamma = 0.0;
    double lambda = 1.0;
    // Minimum hessian sum on each side of a split.
    double min_child_weight = 1.0;
    // Weight of positive examples; defaults to negatives / positives.
    std::optional<double> positive_weight;

    nlohmann::json to_json() const;
    static BoostParams from_json(const nlohmann::json& j);
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // value < threshold goes left
    bool missing_left = true;
    int left = -1;
    int right = -1;
    double weight = 0.0;  // leaf value, learning rate already applied
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double value(const double* row) const;
    int leaf_count() const;
};

struct TrainingTrace {
    // Regularized objective (weighted logistic loss plus the tree penalties) before the first
    // round and after every accepted round.
    std::vector<double> objective;
    std::vector<double> loss;  // unregularized weighted loss, same indexing
};

class BoostedModel {
public:
    const BoostParams& params() const { return params_; }
    const std::vector<Tree>& trees() const { return trees_; }
    const std::vector<std::string>& columns() const { return columns_; }
    const CategoricalEncoder& encoder() const { return encoder_; }
    const std::string& training_fingerprint() const { return training_fingerprint_; }

    double margin(const double* row) const;
    double predict(const double* row) const;  // sigmoid of the additive score
    // Errors: SchemaMismatch (column count).
    std::vector<double> predict(const Matrix& x) const;
    // Errors: SchemaMismatch (feature schema differs from training).
    std::vector<double> predict(const std::vector<FeatureVector>& rows, const FeatureSchema& schema) const;

    // Content hash of trees, params, columns, and encoder.
    std::string fingerprint() const;
    nlohmann::json to_json() const;
    static BoostedModel from_json(const nlohmann::json& j);

private:
    friend BoostedModel train(const Matrix&, const std::vector<int>&, const BoostParams&, TrainingTrace*,
                              std::vector<std::string>);
    friend BoostedModel train_on_features(const std::vector<FeatureVector>&, const std::vector<int>&,
                                          const BoostParams&, TrainingTrace*);

    BoostParams params_;
    std::vector<Tree> trees_;
    std::vector<std::string> columns_;
    CategoricalEncoder encoder_;
    std::string training_fingerprint_;
};

// Second-order boosting of the logistic loss. Each round's tree is accepted only when it
// lowers the regularized objective; its leaves are halved up to ten times first, and
// training stops early when no scaled version helps. Errors: DegenerateLabels, InvalidArgument.
BoostedModel train(const Matrix& x, const std::vector<int>& y, const BoostParams& params = {},
                   TrainingTrace* trace = nullptr, std::vector<std::string> columns = {});
// Fits the categorical encoder on `rows` and trains on the encoded matrix.
BoostedModel train_on_features(const std::vector<FeatureVector>& rows, const std::vector<int>& y,
                               const BoostParams& params = {}, TrainingTrace* trace = nullptr);

// Weighted logistic loss of margins against labels.
double logistic_loss(const std::vector<double>& margins, const std::vector<int>& y, double positive_weight);

// Mann-Whitney AUC with tied scores counted half; absent unless both classes occur.
std::optional<double> auc(const std::vector<double>& scores, const std::vector<int>& y);

struct EvaluationReport {
    std::string window;
    std::optional<double> auc;
    std::optional<double> precision;  // at threshold 0.5
    std::optional<double> recall;
    int true_positive = 0, false_positive = 0, true_negative = 0, false_negative = 0;
    int population = 0;
};

EvaluationReport evaluate(const std::string& window, const std::vector<double>& probabilities,
                          const std::vector<int>& y);
nlohmann::json to_json(const EvaluationReport& r);

struct RollingOptions {
    BoostParams params;
    int grace_days = 0;
    // Control run: training labels are permuted with this seed.
    std::optional<std::uint64_t> shuffle_labels_seed;
};

struct RollingResult {
    std::vector<metrics::RiskCell> predictions;
    std::vector<EvaluationReport> reports;
    std::vector<std::string> warnings;  // windows skipped, e.g. DegenerateLabels
    std::optional<double> mean_auc;
};

// For each tuple: train on (features before train end, observe labels), score the
// population at observe end, evaluate against evaluate-window labels.
RollingResult rolling_predict(const graph::GuaranteeNetwork& net, const WindowPlan& plan,
                              const RollingOptions& opts = {}, const JobControl& job = {});
nlohmann::json to_json(const RollingResult& r);
// enterprise,window_end,probability
std::string predictions_to_csv(const std::vector<metrics::RiskCell>& cells);

}  // namespace glens::risk
