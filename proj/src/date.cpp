#include "glens/date.hpp"

#include <cstdio>

#include "glens/error.hpp"

namespace glens {

using namespace std::chrono;

std::optional<Date> parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    auto digits = [&](std::size_t pos, std::size_t len, int& out) {
        out = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (text[i] < '0' || text[i] > '9') return false;
            out = out * 10 + (text[i] - '0');
        }
        return true;
    };
    int y = 0, m = 0, d = 0;
    if (!digits(0, 4, y) || !digits(5, 2, m) || !digits(8, 2, d)) return std::nullopt;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return sys_days{ymd};
}

Date date_from_string(std::string_view text) {
    auto d = parse_date(text);
    if (!d) throw Error("ParseError", "invalid ISO-8601 date '" + std::string(text) + "'");
    return *d;
}

std::string to_string(Date d) {
    year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

Date make_date(int y, unsigned m, unsigned d) {
    return sys_days{year_month_day{year{y}, month{m}, day{d}}};
}

Date add_months(Date d, int months) {
    year_month_day ymd{d};
    year_month_day shifted = ymd + std::chrono::months{months};
    if (!shifted.ok()) {
        shifted = year_month_day_last{shifted.year(), month_day_last{shifted.month()}};
    }
    return sys_days{shifted};
}

}  // namespace glens
