#pragma once

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dispo {

enum class Side : std::uint8_t { Buy, Sell };

constexpr char side_code(Side s) { return s == Side::Buy ? 'B' : 'S'; }
constexpr Side opposite(Side s) { return s == Side::Buy ? Side::Sell : Side::Buy; }

// ---------------------------------------------------------------------------
// Timestamp: nanoseconds since 1970-01-01T00:00:00 (UTC assumed, no zone).
// ---------------------------------------------------------------------------
struct Timestamp {
    std::int64_t ns = 0;

    static constexpr std::int64_t kNsPerSecond = 1'000'000'000;
    static constexpr std::int64_t kNsPerDay = 86'400 * kNsPerSecond;

    friend constexpr auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

namespace detail {

// Howard Hinnant's days_from_civil / civil_from_days.
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct Civil {
    std::int64_t y;
    unsigned m;
    unsigned d;
};

constexpr Civil civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return {y + (m <= 2), m, d};
}

constexpr bool is_leap(std::int64_t y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

constexpr unsigned days_in_month(std::int64_t y, unsigned m) {
    constexpr unsigned table[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && is_leap(y) ? 29 : table[m - 1];
}

inline bool parse_fixed_digits(std::string_view s, std::size_t pos, std::size_t n, unsigned& out) {
    if (pos + n > s.size()) return false;
    unsigned v = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const char c = s[pos + i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + static_cast<unsigned>(c - '0');
    }
    out = v;
    return true;
}

inline void put_digits(std::string& out, std::int64_t v, int width) {
    char buf[24];
    int n = 0;
    do {
        buf[n++] = static_cast<char>('0' + v % 10);
        v /= 10;
    } while (v > 0);
    for (int i = n; i < width; ++i) out.push_back('0');
    while (n > 0) out.push_back(buf[--n]);
}

}  // namespace detail

// Accepts "YYYY-MM-DDTHH:MM:SS" (or a space instead of 'T'), an optional
// fraction of up to nine digits and an optional trailing 'Z'.
inline std::optional<Timestamp> parse_timestamp(std::string_view s) {
    unsigned y, mo, d, h, mi, se;
    if (s.size() < 19) return std::nullopt;
    if (!detail::parse_fixed_digits(s, 0, 4, y) || s[4] != '-' ||
        !detail::parse_fixed_digits(s, 5, 2, mo) || s[7] != '-' ||
        !detail::parse_fixed_digits(s, 8, 2, d) || (s[10] != 'T' && s[10] != ' ') ||
        !detail::parse_fixed_digits(s, 11, 2, h) || s[13] != ':' ||
        !detail::parse_fixed_digits(s, 14, 2, mi) || s[16] != ':' ||
        !detail::parse_fixed_digits(s, 17, 2, se)) {
        return std::nullopt;
    }
    if (mo < 1 || mo > 12 || d < 1 || d > detail::days_in_month(y, mo) || h > 23 || mi > 59 ||
        se > 59) {
        return std::nullopt;
    }
    std::size_t pos = 19;
    std::int64_t frac_ns = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        std::int64_t scale = Timestamp::kNsPerSecond;
        std::size_t digits = 0;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            if (++digits > 9) return std::nullopt;
            scale /= 10;
            frac_ns += (s[pos] - '0') * scale;
            ++pos;
        }
        if (digits == 0) return std::nullopt;
    }
    if (pos < s.size() && s[pos] == 'Z') ++pos;
    if (pos != s.size()) return std::nullopt;
    const std::int64_t days = detail::days_from_civil(y, mo, d);
    const std::int64_t secs = days * 86'400 + h * 3600 + mi * 60 + se;
    return Timestamp{secs * Timestamp::kNsPerSecond + frac_ns};
}

// Inverse of parse_timestamp; the fraction is printed only when non-zero and
// without trailing zeros.
inline std::string format_timestamp(Timestamp t) {
    std::int64_t secs = t.ns / Timestamp::kNsPerSecond;
    std::int64_t frac = t.ns % Timestamp::kNsPerSecond;
    if (frac < 0) {
        frac += Timestamp::kNsPerSecond;
        --secs;
    }
    std::int64_t days = secs / 86'400;
    std::int64_t rem = secs % 86'400;
    if (rem < 0) {
        rem += 86'400;
        --days;
    }
    const auto c = detail::civil_from_days(days);
    std::string out;
    out.reserve(30);
    detail::put_digits(out, c.y, 4);
    out.push_back('-');
    detail::put_digits(out, c.m, 2);
    out.push_back('-');
    detail::put_digits(out, c.d, 2);
    out.push_back('T');
    detail::put_digits(out, rem / 3600, 2);
    out.push_back(':');
    detail::put_digits(out, rem / 60 % 60, 2);
    out.push_back(':');
    detail::put_digits(out, rem % 60, 2);
    if (frac != 0) {
        int width = 9;
        while (frac % 10 == 0) {
            frac /= 10;
            --width;
        }
        out.push_back('.');
        detail::put_digits(out, frac, width);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Price: fixed-point decimal with eight fractional digits.
// ---------------------------------------------------------------------------
class Price {
public:
    static constexpr int kDecimals = 8;
    static constexpr std::int64_t kScale = 100'000'000;

    constexpr Price() = default;
    static constexpr Price from_ticks(std::int64_t ticks) { return Price(ticks); }
    // Rounds to the nearest tick; intended for generated data and tests.
    static Price from_double(double v) {
        const double scaled = v * static_cast<double>(kScale);
        return Price(static_cast<std::int64_t>(scaled < 0 ? scaled - 0.5 : scaled + 0.5));
    }

    constexpr std::int64_t ticks() const noexcept { return ticks_; }
    constexpr double to_double() const noexcept {
        return static_cast<double>(ticks_) / static_cast<double>(kScale);
    }

    friend constexpr auto operator<=>(const Price&, const Price&) = default;

private:
    constexpr explicit Price(std::int64_t ticks) : ticks_(ticks) {}
    std::int64_t ticks_ = 0;
};

// Plain decimal: optional sign, digits, optional '.' and up to eight digits.
inline std::optional<Price> parse_price(std::string_view s) {
    if (s.empty()) return std::nullopt;
    bool negative = false;
    std::size_t pos = 0;
    if (s[0] == '-' || s[0] == '+') {
        negative = s[0] == '-';
        ++pos;
    }
    std::int64_t whole = 0;
    std::size_t int_digits = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
        if (whole > (INT64_MAX / Price::kScale) / 10) return std::nullopt;
        whole = whole * 10 + (s[pos] - '0');
        ++pos;
        ++int_digits;
    }
    std::int64_t frac = 0;
    std::size_t frac_digits = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            if (++frac_digits > static_cast<std::size_t>(Price::kDecimals)) return std::nullopt;
            frac = frac * 10 + (s[pos] - '0');
            ++pos;
        }
    }
    if (pos != s.size() || int_digits + frac_digits == 0) return std::nullopt;
    for (std::size_t i = frac_digits; i < static_cast<std::size_t>(Price::kDecimals); ++i) frac *= 10;
    const std::int64_t ticks = whole * Price::kScale + frac;
    return Price::from_ticks(negative ? -ticks : ticks);
}

inline std::string format_price(Price p) {
    std::string out;
    std::int64_t t = p.ticks();
    if (t < 0) {
        out.push_back('-');
        t = -t;
    }
    detail::put_digits(out, t / Price::kScale, 1);
    std::int64_t frac = t % Price::kScale;
    if (frac != 0) {
        int width = Price::kDecimals;
        while (frac % 10 == 0) {
            frac /= 10;
            --width;
        }
        out.push_back('.');
        detail::put_digits(out, frac, width);
    }
    return out;
}

// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, end);
}

// Median with the usual even-size average; 0 for an empty sample.
inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return (lower + upper) / 2.0;
}

// ---------------------------------------------------------------------------
// Input records
// ---------------------------------------------------------------------------
struct Transaction {
    std::string investor_id;
    std::string asset_id;
    Side side = Side::Buy;
    std::int64_t quantity = 0;
    Price price;
    Timestamp timestamp;
    std::uint64_t seq = 0;

    friend bool operator==(const Transaction&, const Transaction&) = default;
};

struct Instrument {
    std::string asset_id;
    std::string underlying_id;
    double leverage = 1.0;

    bool is_long_exposure() const { return leverage > 0; }
    bool is_short_exposure() const { return leverage < 0; }

    friend bool operator==(const Instrument&, const Instrument&) = default;
};

}  // namespace dispo
