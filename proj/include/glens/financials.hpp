#pragma once

#include <optional>
#include <span>
#include <vector>

#include "glens/date.hpp"
#include "glens/graph.hpp"

namespace glens::graph {

struct FirmFinancials {
    bool defaulted = false;       // any defaulted installment due within the span
    double loan_amount = 0.0;     // contracts overlapping the span
    double default_amount = 0.0;  // amount of those contracts with a defaulted installment
};

// Span defaults to the network's full date span.
std::vector<FirmFinancials> firm_financials(const GuaranteeNetwork& net, std::optional<DateRange> span = std::nullopt,
                                            int grace_days = 0);

// Half-up whole percent of num/den; absent when den == 0.
std::optional<int> percent_half_up(double num, double den);

}  // namespace glens::graph
