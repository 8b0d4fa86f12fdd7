#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace trendlab {

/// Calendar date with day resolution, stored as days since 1970-01-01.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days d) : days_(d.time_since_epoch().count()) {}
    Date(int year, unsigned month, unsigned day);

    /// Parses `YYYY-MM-DD`. Throws ParseError on anything else.
    static Date parse(std::string_view text);

    std::string to_string() const;
    constexpr int serial() const { return days_; }
    constexpr std::chrono::sys_days sys_days() const {
        return std::chrono::sys_days{std::chrono::days{days_}};
    }
    bool is_weekend() const;

    /// Next Monday..Friday date strictly after this one.
    Date next_business_day() const;

    constexpr auto operator<=>(const Date&) const = default;

private:
    int days_ = 0;
};

}  // namespace trendlab
