#include "glens/financials.hpp"

#include <cmath>

namespace glens::graph {

std::vector<FirmFinancials> firm_financials(const GuaranteeNetwork& net, std::optional<DateRange> span,
                                            int grace_days) {
    std::vector<FirmFinancials> out(net.node_count());
    auto range = span ? span : net.date_span();
    if (!range) return out;
    for (NodeIndex v = 0; v < net.node_count(); ++v) {
        auto& f = out[v];
        for (auto c : net.contracts_of(v)) {
            const auto& contract = net.contracts()[c];
            if (!(contract.start_date < range->end && contract.maturity() >= range->begin)) continue;
            f.loan_amount += contract.loan_amount;
            bool contract_default = false;
            for (auto r : net.repayments_of_contract(c)) {
                const auto& ev = net.repayments()[r];
                if (range->contains(ev.due_date) && ev.is_default(grace_days)) {
                    contract_default = true;
                    break;
                }
            }
            if (contract_default) {
                f.defaulted = true;
                f.default_amount += contract.loan_amount;
            }
        }
    }
    return out;
}

std::optional<int> percent_half_up(double num, double den) {
    if (den == 0.0) return std::nullopt;
    // Relative nudge absorbs representation error in exact halves such as 12.5.
    double pct = 100.0 * num / den;
    return static_cast<int>(std::floor(pct + 0.5 + 1e-9 * std::max(1.0, std::fabs(pct))));
}

}  // namespace glens::graph
