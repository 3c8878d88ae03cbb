#include "glens/ingest.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "glens/error.hpp"

namespace glens::ingest {

namespace fs = std::filesystem;

nlohmann::json row_counts(const TableSet& t) {
    return {{"customer_profile", t.customer_profile.size()},
            {"loan_account", t.loan_account.size()},
            {"repayment_status", t.repayment_status.size()},
            {"guarantee_profile", t.guarantee_profile.size()},
            {"customer_credit", t.customer_credit.size()},
            {"loan_contract", t.loan_contract.size()},
            {"guarantee_relationship", t.guarantee_relationship.size()},
            {"guarantee_contract", t.guarantee_contract.size()},
            {"default_status", t.default_status.size()}};
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t i = 0;
    if (text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;  // UTF-8 BOM
    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
        row.clear();
    };
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field_started || !field.empty()) throw Error("ParseError", "stray quote inside unquoted field");
                quoted = true;
                field_started = true;
                break;
            case ',':
                end_field();
                break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
                end_row();
                break;
            case '\n':
                end_row();
                break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (quoted) throw Error("ParseError", "unterminated quoted field");
    if (field_started || !field.empty() || !row.empty()) end_row();
    return rows;
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += '"';
    return out;
}

std::string format_money(double amount) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", amount);
    return buf;
}

namespace {

class RowReader {
public:
    RowReader(std::string_view table, const std::vector<std::string>& header) : table_(table) {
        for (std::size_t i = 0; i < header.size(); ++i) columns_[header[i]] = i;
    }

    void require(std::initializer_list<std::string_view> names) const {
        for (auto n : names) {
            if (!columns_.count(std::string(n)))
                throw Error("ParseError",
                            "table " + std::string(table_) + ": missing column '" + std::string(n) + "'",
                            std::string(table_) + ":header:" + std::string(n));
        }
    }

    void bind(const std::vector<std::string>* row, std::size_t line) {
        row_ = row;
        line_ = line;
    }

    const std::string& text(std::string_view col) const {
        auto idx = columns_.at(std::string(col));
        if (idx >= row_->size()) fail(col, "missing field");
        return (*row_)[idx];
    }

    std::string id(std::string_view col) const {
        const auto& s = text(col);
        if (s.empty()) fail(col, "empty identifier");
        return s;
    }

    double money(std::string_view col) const {
        const auto& s = text(col);
        double v = 0.0;
        if (!parse_decimal(s, v)) fail(col, "malformed amount '" + s + "'");
        return v;
    }

    std::int64_t integer(std::string_view col) const {
        const auto& s = text(col);
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) fail(col, "malformed integer '" + s + "'");
        return v;
    }

    Date date(std::string_view col) const {
        const auto& s = text(col);
        auto d = parse_date(s);
        if (!d) fail(col, "malformed date '" + s + "'");
        return *d;
    }

    std::optional<Date> optional_date(std::string_view col) const {
        if (text(col).empty()) return std::nullopt;
        return date(col);
    }

    [[noreturn]] void fail(std::string_view col, const std::string& reason) const {
        throw Error("ParseError",
                    "table " + std::string(table_) + ", row " + std::to_string(line_) + ", column " +
                        std::string(col) + ": " + reason,
                    std::string(table_) + ":" + std::to_string(line_) + ":" + std::string(col));
    }

private:
    static bool parse_decimal(const std::string& s, double& out) {
        if (s.empty()) return false;
        std::size_t i = (s[0] == '-') ? 1 : 0;
        bool digits = false, dot = false;
        for (; i < s.size(); ++i) {
            if (s[i] >= '0' && s[i] <= '9') digits = true;
            else if (s[i] == '.' && !dot) dot = true;
            else return false;
        }
        if (!digits) return false;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc{} && p == s.data() + s.size() && std::isfinite(out);
    }

    std::string_view table_;
    std::unordered_map<std::string, std::size_t> columns_;
    const std::vector<std::string>* row_ = nullptr;
    std::size_t line_ = 0;
};

template <class Fn>
void for_rows(std::string_view table, std::string_view text, std::initializer_list<std::string_view> required,
              Fn&& fn) {
    std::vector<std::vector<std::string>> rows;
    try {
        rows = parse_csv(text);
    } catch (const Error& e) {
        throw Error("ParseError", "table " + std::string(table) + ": " + e.what(), std::string(table));
    }
    if (rows.empty()) throw Error("ParseError", "table " + std::string(table) + " has no header row",
                                  std::string(table));
    RowReader reader(table, rows[0]);
    reader.require(required);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        reader.bind(&rows[i], i);
        fn(reader);
    }
}

}  // namespace

void parse_table(TableSet& t, std::string_view table, std::string_view text) {
    if (table == "customer_profile") {
        for_rows(table, text,
                 {"customer_id", "record_date", "business_nature", "registered_capital", "enterprise_scale",
                  "employee_count", "sector"},
                 [&](const RowReader& r) {
                     t.customer_profile.push_back({r.id("customer_id"), r.date("record_date"),
                                                   r.text("business_nature"), r.money("registered_capital"),
                                                   r.text("enterprise_scale"), r.integer("employee_count"),
                                                   r.text("sector")});
                 });
    } else if (table == "loan_account") {
        for_rows(table, text, {"customer_id", "account_id", "record_date", "deposit_balance"},
                 [&](const RowReader& r) {
                     t.loan_account.push_back(
                         {r.id("customer_id"), r.id("account_id"), r.date("record_date"), r.money("deposit_balance")});
                 });
    } else if (table == "repayment_status") {
        for_rows(table, text,
                 {"contract_id", "installment_no", "due_date", "due_amount", "paid_date", "paid_amount"},
                 [&](const RowReader& r) {
                     t.repayment_status.push_back({r.id("contract_id"), r.integer("installment_no"),
                                                   r.date("due_date"), r.money("due_amount"),
                                                   r.optional_date("paid_date"), r.money("paid_amount")});
                 });
    } else if (table == "guarantee_profile") {
        for_rows(table, text, {"customer_id", "guarantor_type"}, [&](const RowReader& r) {
            t.guarantee_profile.push_back({r.id("customer_id"), r.text("guarantor_type")});
        });
    } else if (table == "customer_credit") {
        for_rows(table, text, {"customer_id", "rating_date", "credit_rating"}, [&](const RowReader& r) {
            t.customer_credit.push_back(
                {r.id("customer_id"), r.date("rating_date"), static_cast<int>(r.integer("credit_rating"))});
        });
    } else if (table == "loan_contract") {
        for_rows(table, text,
                 {"contract_id", "customer_id", "loan_amount", "start_date", "capital_return_type",
                  "interest_return_type"},
                 [&](const RowReader& r) {
                     t.loan_contract.push_back({r.id("contract_id"), r.id("customer_id"), r.money("loan_amount"),
                                                r.date("start_date"), r.text("capital_return_type"),
                                                r.text("interest_return_type")});
                 });
    } else if (table == "guarantee_relationship") {
        for_rows(table, text, {"guarantee_contract_id", "guarantor_id", "borrower_id", "loan_contract_id"},
                 [&](const RowReader& r) {
                     t.guarantee_relationship.push_back({r.id("guarantee_contract_id"), r.id("guarantor_id"),
                                                         r.id("borrower_id"), r.text("loan_contract_id")});
                 });
    } else if (table == "guarantee_contract") {
        for_rows(table, text, {"guarantee_contract_id", "guarantee_amount", "valid_from", "valid_to"},
                 [&](const RowReader& r) {
                     t.guarantee_contract.push_back({r.id("guarantee_contract_id"), r.money("guarantee_amount"),
                                                     r.optional_date("valid_from"), r.optional_date("valid_to")});
                 });
    } else if (table == "default_status") {
        for_rows(table, text, {"customer_id", "status_date", "status"}, [&](const RowReader& r) {
            t.default_status.push_back({r.id("customer_id"), r.date("status_date"), r.text("status")});
        });
    } else {
        throw Error("UnknownTable", "unknown table '" + std::string(table) + "'", std::string(table));
    }
}

TableSet load_tables(const fs::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw Error("MissingTable", "cannot open manifest " + manifest_path.string(), "manifest");
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw Error("ParseError", "manifest is not valid JSON: " + std::string(e.what()), "manifest");
    }
    if (!manifest.is_object()) throw Error("ParseError", "manifest must be a JSON object", "manifest");
    const fs::path root = manifest_path.parent_path();

    TableSet tables;
    for (auto name : kTableNames) {
        const std::string key(name);
        if (!manifest.contains(key) || !manifest[key].is_string())
            throw Error("MissingTable", "manifest lacks table '" + key + "'", key);
        fs::path file = root / manifest[key].get<std::string>();
        std::ifstream tf(file, std::ios::binary);
        if (!tf) throw Error("MissingTable", "table file for '" + key + "' not found: " + file.string(), key);
        std::stringstream buf;
        buf << tf.rdbuf();
        parse_table(tables, name, buf.str());
    }
    return tables;
}

std::string table_to_csv(const TableSet& t, std::string_view table) {
    std::string out;
    auto line = [&](std::initializer_list<std::string> fields) {
        bool first = true;
        for (const auto& f : fields) {
            if (!first) out += ',';
            out += csv_escape(f);
            first = false;
        }
        out += '\n';
    };
    auto opt_date = [](const std::optional<Date>& d) { return d ? to_string(*d) : std::string(); };

    if (table == "customer_profile") {
        line({"customer_id", "record_date", "business_nature", "registered_capital", "enterprise_scale",
              "employee_count", "sector"});
        for (const auto& r : t.customer_profile)
            line({r.customer_id, to_string(r.record_date), r.business_nature, format_money(r.registered_capital),
                  r.enterprise_scale, std::to_string(r.employee_count), r.sector});
    } else if (table == "loan_account") {
        line({"customer_id", "account_id", "record_date", "deposit_balance"});
        for (const auto& r : t.loan_account)
            line({r.customer_id, r.account_id, to_string(r.record_date), format_money(r.deposit_balance)});
    } else if (table == "repayment_status") {
        line({"contract_id", "installment_no", "due_date", "due_amount", "paid_date", "paid_amount"});
        for (const auto& r : t.repayment_status)
            line({r.contract_id, std::to_string(r.installment_no), to_string(r.due_date), format_money(r.due_amount),
                  opt_date(r.paid_date), format_money(r.paid_amount)});
    } else if (table == "guarantee_profile") {
        line({"customer_id", "guarantor_type"});
        for (const auto& r : t.guarantee_profile) line({r.customer_id, r.guarantor_type});
    } else if (table == "customer_credit") {
        line({"customer_id", "rating_date", "credit_rating"});
        for (const auto& r : t.customer_credit)
            line({r.customer_id, to_string(r.rating_date), std::to_string(r.credit_rating)});
    } else if (table == "loan_contract") {
        line({"contract_id", "customer_id", "loan_amount", "start_date", "capital_return_type",
              "interest_return_type"});
        for (const auto& r : t.loan_contract)
            line({r.contract_id, r.customer_id, format_money(r.loan_amount), to_string(r.start_date),
                  r.capital_return_type, r.interest_return_type});
    } else if (table == "guarantee_relationship") {
        line({"guarantee_contract_id", "guarantor_id", "borrower_id", "loan_contract_id"});
        for (const auto& r : t.guarantee_relationship)
            line({r.guarantee_contract_id, r.guarantor_id, r.borrower_id, r.loan_contract_id});
    } else if (table == "guarantee_contract") {
        line({"guarantee_contract_id", "guarantee_amount", "valid_from", "valid_to"});
        for (const auto& r : t.guarantee_contract)
            line({r.guarantee_contract_id, format_money(r.guarantee_amount), opt_date(r.valid_from),
                  opt_date(r.valid_to)});
    } else if (table == "default_status") {
        line({"customer_id", "status_date", "status"});
        for (const auto& r : t.default_status) line({r.customer_id, to_string(r.status_date), r.status});
    } else {
        throw Error("UnknownTable", "unknown table '" + std::string(table) + "'", std::string(table));
    }
    return out;
}

fs::path write_tables(const TableSet& tables, const fs::path& dir) {
    fs::create_directories(dir);
    nlohmann::json manifest = nlohmann::json::object();
    for (auto name : kTableNames) {
        std::string file = std::string(name) + ".csv";
        std::ofstream out(dir / file, std::ios::binary);
        out << table_to_csv(tables, name);
        if (!out) throw Error("IoError", "failed writing " + (dir / file).string());
        manifest[std::string(name)] = file;
    }
    fs::path manifest_path = dir / "manifest.json";
    std::ofstream m(manifest_path);
    m << manifest.dump(2) << '\n';
    return manifest_path;
}

graph::GuaranteeNetwork join_to_network(const TableSet& t) {
    using namespace graph;
    std::map<std::string, Enterprise> by_id;
    for (const auto& r : t.customer_profile) {
        auto& e = by_id[r.customer_id];
        e.id = r.customer_id;
        e.profiles.push_back({r.record_date, r.business_nature, r.registered_capital, r.enterprise_scale,
                              r.employee_count, r.sector});
    }
    auto customer = [&](const std::string& id, std::string_view table) -> Enterprise& {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw Error("UnknownEnterprise",
                        "table " + std::string(table) + " references customer '" + id +
                            "' absent from customer_profile",
                        id);
        return it->second;
    };
    for (const auto& r : t.customer_credit)
        customer(r.customer_id, "customer_credit").credit_ratings.push_back({r.rating_date, r.credit_rating});
    for (const auto& r : t.loan_account)
        customer(r.customer_id, "loan_account").deposits.push_back({r.record_date, r.deposit_balance});
    for (const auto& r : t.default_status)
        customer(r.customer_id, "default_status").statuses.push_back({r.status_date, r.status});
    for (const auto& r : t.guarantee_profile) customer(r.customer_id, "guarantee_profile").guarantor_type = r.guarantor_type;

    // Deposits from several accounts on one date aggregate into a single balance.
    for (auto& [id, e] : by_id) {
        std::map<Date, double> totals;
        for (const auto& d : e.deposits) totals[d.as_of] += d.balance;
        e.deposits.clear();
        for (const auto& [date, bal] : totals) e.deposits.push_back({date, bal});
    }

    std::unordered_map<std::string, std::size_t> contract_pos;
    std::vector<LoanContract> contracts;
    for (const auto& r : t.loan_contract) {
        customer(r.customer_id, "loan_contract");
        if (!contract_pos.emplace(r.contract_id, contracts.size()).second)
            throw Error("DuplicateId", "table loan_contract repeats contract '" + r.contract_id + "'", r.contract_id);
        contracts.push_back({r.contract_id, r.customer_id, r.loan_amount, r.start_date, r.capital_return_type,
                             r.interest_return_type, {}});
    }

    std::vector<RepaymentEvent> repayments;
    repayments.reserve(t.repayment_status.size());
    std::vector<std::vector<const RepaymentStatusRow*>> schedule(contracts.size());
    for (const auto& r : t.repayment_status) {
        auto it = contract_pos.find(r.contract_id);
        if (it == contract_pos.end())
            throw Error("UnknownContract",
                        "table repayment_status references contract '" + r.contract_id +
                            "' absent from loan_contract",
                        r.contract_id);
        schedule[it->second].push_back(&r);
        repayments.push_back({r.contract_id, r.due_date, r.due_amount, r.paid_date, r.paid_amount});
    }
    for (std::size_t c = 0; c < contracts.size(); ++c) {
        auto& rows = schedule[c];
        std::stable_sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->installment_no < b->installment_no; });
        for (auto* r : rows) contracts[c].installments.push_back({r->due_date, r->due_amount});
    }

    std::unordered_map<std::string, const GuaranteeContractRow*> gcontracts;
    for (const auto& r : t.guarantee_contract) {
        if (!gcontracts.emplace(r.guarantee_contract_id, &r).second)
            throw Error("DuplicateId", "table guarantee_contract repeats '" + r.guarantee_contract_id + "'",
                        r.guarantee_contract_id);
    }
    std::vector<GuaranteeEdge> edges;
    edges.reserve(t.guarantee_relationship.size());
    std::unordered_set<std::string> seen_guarantees;
    for (const auto& r : t.guarantee_relationship) {
        customer(r.guarantor_id, "guarantee_relationship");
        customer(r.borrower_id, "guarantee_relationship");
        auto gc = gcontracts.find(r.guarantee_contract_id);
        if (gc == gcontracts.end())
            throw Error("UnknownContract",
                        "table guarantee_relationship references guarantee contract '" + r.guarantee_contract_id +
                            "' absent from guarantee_contract",
                        r.guarantee_contract_id);
        if (!seen_guarantees.insert(r.guarantee_contract_id).second)
            throw Error("DuplicateId",
                        "table guarantee_relationship repeats guarantee contract '" + r.guarantee_contract_id + "'",
                        r.guarantee_contract_id);
        if (!r.loan_contract_id.empty() && !contract_pos.count(r.loan_contract_id))
            throw Error("UnknownContract",
                        "table guarantee_relationship references loan contract '" + r.loan_contract_id +
                            "' absent from loan_contract",
                        r.loan_contract_id);
        if (!gc->second->valid_from)
            throw Error("InvalidInterval",
                        "table guarantee_contract row '" + r.guarantee_contract_id + "' lacks valid_from",
                        r.guarantee_contract_id);
        edges.push_back({r.guarantor_id, r.borrower_id, gc->second->guarantee_amount, r.guarantee_contract_id,
                         r.loan_contract_id, *gc->second->valid_from, gc->second->valid_to});
    }

    std::vector<Enterprise> enterprises;
    enterprises.reserve(by_id.size());
    for (auto& [id, e] : by_id) enterprises.push_back(std::move(e));
    return build_network(std::move(enterprises), std::move(edges), std::move(contracts), std::move(repayments));
}

OverallStats overall_stats(const TableSet& t, int grace_days) {
    OverallStats s;
    std::unordered_set<std::string> customers;
    for (const auto& r : t.customer_profile) customers.insert(r.customer_id);
    s.customer_count = static_cast<std::int64_t>(customers.size());
    s.guarantee_relation_count = static_cast<std::int64_t>(t.guarantee_relationship.size());
    s.contract_count = static_cast<std::int64_t>(t.loan_contract.size());
    s.repayment_count = static_cast<std::int64_t>(t.repayment_status.size());
    for (const auto& r : t.repayment_status) {
        if (!r.paid_date || *r.paid_date > add_days(r.due_date, grace_days)) ++s.default_count;
    }
    if (s.repayment_count > 0)
        s.default_rate_per_repayment =
            round_significant(static_cast<double>(s.default_count) / static_cast<double>(s.repayment_count), 4);
    if (s.contract_count > 0)
        s.default_rate_per_contract =
            round_significant(static_cast<double>(s.default_count) / static_cast<double>(s.contract_count), 4);
    return s;
}

double round_significant(double value, int digits) {
    if (value == 0.0 || !std::isfinite(value)) return value;
    double magnitude = std::floor(std::log10(std::fabs(value)));
    double scale = std::pow(10.0, digits - 1 - magnitude);
    return std::round(value * scale) / scale;
}

nlohmann::json to_json(const OverallStats& s) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {{"customer_count", s.customer_count},
            {"guarantee_relation_count", s.guarantee_relation_count},
            {"contract_count", s.contract_count},
            {"repayment_count", s.repayment_count},
            {"default_count", s.default_count},
            {"default_rate_per_repayment", opt(s.default_rate_per_repayment)},
            {"default_rate_per_contract", opt(s.default_rate_per_contract)}};
}

}  // namespace glens::ingest
