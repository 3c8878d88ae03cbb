#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glens/date.hpp"
#include "glens/graph.hpp"
#include "json.hpp"

namespace glens::ingest {

// ---- record tables -------------------------------------------------------------

struct CustomerProfileRow {
    std::string customer_id;
    Date record_date;
    std::string business_nature;
    double registered_capital = 0.0;
    std::string enterprise_scale;
    std::int64_t employee_count = 0;
    std::string sector;
};

// Deposit balances observed on the customer's loan accounts.
struct LoanAccountRow {
    std::string customer_id;
    std::string account_id;
    Date record_date;
    double deposit_balance = 0.0;
};

struct RepaymentStatusRow {
    std::string contract_id;
    std::int64_t installment_no = 0;
    Date due_date;
    double due_amount = 0.0;
    std::optional<Date> paid_date;
    double paid_amount = 0.0;
};

struct GuaranteeProfileRow {
    std::string customer_id;
    std::string guarantor_type;
};

struct CustomerCreditRow {
    std::string customer_id;
    Date rating_date;
    int credit_rating = 0;
};

struct LoanContractRow {
    std::string contract_id;
    std::string customer_id;
    double loan_amount = 0.0;
    Date start_date;
    std::string capital_return_type;
    std::string interest_return_type;
};

struct GuaranteeRelationshipRow {
    std::string guarantee_contract_id;
    std::string guarantor_id;
    std::string borrower_id;
    std::string loan_contract_id;
};

struct GuaranteeContractRow {
    std::string guarantee_contract_id;
    double guarantee_amount = 0.0;
    std::optional<Date> valid_from;
    std::optional<Date> valid_to;
};

struct DefaultStatusRow {
    std::string customer_id;
    Date status_date;
    std::string status;
};

struct TableSet {
    std::vector<CustomerProfileRow> customer_profile;
    std::vector<LoanAccountRow> loan_account;
    std::vector<RepaymentStatusRow> repayment_status;
    std::vector<GuaranteeProfileRow> guarantee_profile;
    std::vector<CustomerCreditRow> customer_credit;
    std::vector<LoanContractRow> loan_contract;
    std::vector<GuaranteeRelationshipRow> guarantee_relationship;
    std::vector<GuaranteeContractRow> guarantee_contract;
    std::vector<DefaultStatusRow> default_status;
};

inline constexpr std::array<std::string_view, 9> kTableNames = {
    "customer_profile", "loan_account",           "repayment_status",
    "guarantee_profile", "customer_credit",       "loan_contract",
    "guarantee_relationship", "guarantee_contract", "default_status"};

nlohmann::json row_counts(const TableSet& tables);

// ---- delimited text --------------------------------------------------------------

// RFC-4180 style: comma separated, double-quote quoting with "" escapes, CRLF or LF.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::string csv_escape(std::string_view field);

// Reads manifest.json ({table: relative path}, all nine keys required) and every table.
// Errors: MissingTable(name), ParseError(table/row/column).
TableSet load_tables(const std::filesystem::path& manifest);

// Parses one table's text; `table` must be one of kTableNames.
void parse_table(TableSet& tables, std::string_view table, std::string_view text);

// Serializes one table as CSV with a header row.
std::string table_to_csv(const TableSet& tables, std::string_view table);

// Writes `<dir>/<table>.csv` for every table and `<dir>/manifest.json`.
std::filesystem::path write_tables(const TableSet& tables, const std::filesystem::path& dir);

std::string format_money(double amount);

// ---- join ---------------------------------------------------------------------------

// customer id joins profile/credit/default/account tables; contract ids join loan,
// guarantee and repayment tables. Errors name the offending tables.
graph::GuaranteeNetwork join_to_network(const TableSet& tables);

// ---- statistics ----------------------------------------------------------------------

struct OverallStats {
    std::int64_t customer_count = 0;
    std::int64_t guarantee_relation_count = 0;
    std::int64_t contract_count = 0;
    std::int64_t repayment_count = 0;
    std::int64_t default_count = 0;  // repayments in default
    // default_count / repayment_count; absent with zero repayments.
    std::optional<double> default_rate_per_repayment;
    // default_count / contract_count; absent with zero contracts.
    std::optional<double> default_rate_per_contract;
};

OverallStats overall_stats(const TableSet& tables, int grace_days = 0);

// Rounds to `digits` significant digits.
double round_significant(double value, int digits);

nlohmann::json to_json(const OverallStats& s);

// ---- synthetic data --------------------------------------------------------------------

struct MotifTemplate {
    std::string name;
    int k = 0;
    std::vector<std::pair<int, int>> edges;  // slot -> slot, guarantor -> borrower
    int count = 0;
};

// Single-input single-output feed-forward 4-node shapes.
std::vector<MotifTemplate> feed_forward_library(int count_each);

struct SyntheticConfig {
    int community_count = 6;
    int community_size_min = 20;
    int community_size_max = 30;
    double intra_density = 0.08;  // fraction of ordered intra-community pairs wired
    double inter_density = 0.002; // fraction of ordered cross-community pairs wired
    // When positive, inter-community edges are added until the relation count equals it.
    std::int64_t edge_budget = 0;
    int mutual_pairs = 2;
    int revolving_cycles = 2;
    int revolving_min_len = 3;
    int revolving_max_len = 5;
    int stars = 2;
    int star_min_borrowers = 3;
    int star_max_borrowers = 5;
    int joint_liability = 2;
    int joint_min_guarantors = 2;
    int joint_max_guarantors = 3;
    std::vector<MotifTemplate> motifs = feed_forward_library(1);
    double seed_fraction = 0.05;
    // When non-empty, exactly these enterprises seed the cascade and seed_fraction is ignored.
    std::vector<std::string> seed_ids;
    double propagation_probability = 0.5;
    // Default-rate noise for healthy firms, per installment.
    double background_default_rate = 0.01;
    // Per-installment default probability once a firm's default onset has passed.
    double post_onset_default_rate = 0.85;
    Date span_begin = make_date(2013, 1, 1);
    Date span_end = make_date(2015, 1, 1);
    std::uint64_t seed = 1;

    void validate() const;  // throws InfeasibleConfig
};

SyntheticConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SyntheticConfig& c);

struct PlantedMotif {
    std::string name;
    int k = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<std::string>> instances;  // node id per slot
};

struct CascadeEntry {
    std::string id;
    Date onset;
    bool seed = false;
    std::string source;  // borrower whose default spread here; empty for seeds
};

struct GroundTruth {
    std::uint64_t seed = 0;
    std::vector<std::vector<std::string>> communities;
    std::vector<std::pair<std::string, std::string>> mutual_pairs;
    std::vector<std::vector<std::string>> revolving_cycles;  // in guarantee order
    std::vector<std::pair<std::string, std::vector<std::string>>> stars;            // guarantor, borrowers
    std::vector<std::pair<std::string, std::vector<std::string>>> joint_liability;  // borrower, guarantors
    std::vector<PlantedMotif> motifs;
    std::vector<CascadeEntry> cascade;  // ordered by onset
    std::int64_t customer_count = 0;
    std::int64_t relation_count = 0;
    std::int64_t contract_count = 0;
    std::int64_t repayment_count = 0;
    std::int64_t default_repayment_count = 0;
};

nlohmann::json to_json(const GroundTruth& g);

struct SyntheticData {
    TableSet tables;
    GroundTruth truth;
};

// Deterministic for a fixed config (including seed).
SyntheticData generate_synthetic(const SyntheticConfig& config);

}  // namespace glens::ingest
