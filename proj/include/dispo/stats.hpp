#pragma once

// Two-sample Mann-Whitney U test with exact and large-sample p-values.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dispo/error.hpp"
#include "dispo/types.hpp"

namespace dispo {

enum class Stars : std::uint8_t { None, One, Two, Three };
enum class PValueMode : std::uint8_t { Exact, NormalApprox };

enum class ModePolicy : std::uint8_t {
    Auto,    // exact when n1 * n2 <= 400 and there are no ties
    Normal,  // always the normal approximation
};

inline constexpr std::size_t kExactCellLimit = 400;
inline constexpr std::string_view kStarLegend = "* p<0.1, ** p<0.05, *** p<0.01";

constexpr Stars stars_for(double p) {
    if (p < 0.01) return Stars::Three;
    if (p < 0.05) return Stars::Two;
    if (p < 0.1) return Stars::One;
    return Stars::None;
}

constexpr std::string_view to_string(Stars s) {
    switch (s) {
        case Stars::None: return "";
        case Stars::One: return "*";
        case Stars::Two: return "**";
        case Stars::Three: return "***";
    }
    return "";
}

constexpr std::string_view to_string(PValueMode m) {
    return m == PValueMode::Exact ? "exact" : "normal";
}

struct TestResult {
    double median_first = 0;
    double median_second = 0;
    double median_diff = 0;  // first minus second
    double u_statistic = 0;  // U of the first sample
    double p_value = 1;
    Stars stars = Stars::None;
    PValueMode mode = PValueMode::NormalApprox;
    std::size_t n_first = 0;
    std::size_t n_second = 0;
};

// Number of arrangements giving each U in [0, n1*n2] for tie-free samples of
// sizes n1 and n2. Uses c(m, n, u) = c(m - 1, n, u - n) + c(m, n - 1, u).
inline std::vector<double> u_distribution(std::size_t n1, std::size_t n2) {
    // row[j] holds the distribution for (i, j) while sweeping i upward.
    std::vector<std::vector<double>> row(n2 + 1);
    for (std::size_t j = 0; j <= n2; ++j) row[j] = {1.0};  // i = 0
    for (std::size_t i = 1; i <= n1; ++i) {
        std::vector<std::vector<double>> next(n2 + 1);
        next[0] = {1.0};
        for (std::size_t j = 1; j <= n2; ++j) {
            std::vector<double> d(i * j + 1, 0.0);
            // (i - 1, j) shifted by j
            for (std::size_t u = 0; u < row[j].size(); ++u) d[u + j] += row[j][u];
            // (i, j - 1)
            for (std::size_t u = 0; u < next[j - 1].size(); ++u) d[u] += next[j - 1][u];
            next[j] = std::move(d);
        }
        row = std::move(next);
    }
    return row[n2];
}

// Two-sided exact p: twice the smaller tail at `u`, capped at 1.
inline double exact_u_pvalue(std::size_t n1, std::size_t n2, double u) {
    const auto dist = u_distribution(n1, n2);
    const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
    double lower = 0, upper = 0;
    for (std::size_t k = 0; k < dist.size(); ++k) {
        const auto kd = static_cast<double>(k);
        if (kd <= u + 1e-9) lower += dist[k];
        if (kd >= u - 1e-9) upper += dist[k];
    }
    return std::min(1.0, 2.0 * std::min(lower, upper) / total);
}

namespace detail {

struct RankSummary {
    double rank_sum_first = 0;
    double tie_term = 0;  // sum over tie groups of t^3 - t
    bool has_ties = false;
};

inline RankSummary rank_samples(std::span<const double> x, std::span<const double> y) {
    struct Item {
        double v;
        bool first;
    };
    std::vector<Item> all;
    all.reserve(x.size() + y.size());
    for (double v : x) all.push_back({v, true});
    for (double v : y) all.push_back({v, false});
    std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.v < b.v; });
    RankSummary s;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i + 1;
        while (j < all.size() && all[j].v == all[i].v) ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        const auto t = static_cast<double>(j - i);
        if (j - i > 1) {
            s.has_ties = true;
            s.tie_term += t * t * t - t;
        }
        for (std::size_t k = i; k < j; ++k) {
            if (all[k].first) s.rank_sum_first += midrank;
        }
        i = j;
    }
    return s;
}

}  // namespace detail

// Normal approximation with tie and continuity corrections.
inline double normal_u_pvalue(std::size_t n1, std::size_t n2, double u, double tie_term) {
    const auto a = static_cast<double>(n1);
    const auto b = static_cast<double>(n2);
    const double n = a + b;
    const double mean = a * b / 2.0;
    double var = a * b / 12.0 * ((n + 1.0) - (n > 1 ? tie_term / (n * (n - 1.0)) : 0.0));
    if (!(var > 0)) return 1.0;
    const double z = std::max(0.0, std::abs(u - mean) - 0.5) / std::sqrt(var);
    return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

inline TestResult mann_whitney(std::span<const double> x, std::span<const double> y,
                               ModePolicy policy = ModePolicy::Auto) {
    if (x.empty() || y.empty()) {
        throw Error(ErrorKind::EmptySample, "both samples need at least one value (sizes " +
                                                std::to_string(x.size()) + ", " +
                                                std::to_string(y.size()) + ")");
    }
    TestResult r;
    r.n_first = x.size();
    r.n_second = y.size();
    r.median_first = median(std::vector<double>(x.begin(), x.end()));
    r.median_second = median(std::vector<double>(y.begin(), y.end()));
    r.median_diff = r.median_first - r.median_second;

    const auto ranks = detail::rank_samples(x, y);
    const auto n1 = static_cast<double>(x.size());
    r.u_statistic = ranks.rank_sum_first - n1 * (n1 + 1.0) / 2.0;

    const bool exact = policy == ModePolicy::Auto && !ranks.has_ties &&
                       x.size() * y.size() <= kExactCellLimit;
    if (exact) {
        r.mode = PValueMode::Exact;
        r.p_value = exact_u_pvalue(x.size(), y.size(), r.u_statistic);
    } else {
        r.mode = PValueMode::NormalApprox;
        r.p_value = normal_u_pvalue(x.size(), y.size(), r.u_statistic, ranks.tie_term);
    }
    r.p_value = std::clamp(r.p_value, 0.0, 1.0);
    r.stars = stars_for(r.p_value);
    return r;
}

// "-0.175***": median difference at `decimals` places plus significance stars.
// A difference that rounds to zero prints without a minus sign.
inline std::string format_cell(const TestResult& r, int decimals = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, r.median_diff);
    std::string s = buf;
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    s += to_string(r.stars);
    return s;
}

}  // namespace dispo
