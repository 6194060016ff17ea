#pragma once

// Realized / paper gain-loss accrual and the disposition-effect ratio.
//
// Three tally units are kept side by side for every key:
//   Count  one per realization leg or per open position evaluated
//   Total  units closed, or units held
//   Value  absolute fractional return of the leg or position
// A return of exactly zero accrues nowhere.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dispo/csv.hpp"
#include "dispo/dataset.hpp"
#include "dispo/error.hpp"
#include "dispo/ledger.hpp"
#include "dispo/rational.hpp"

namespace dispo {

enum class Method : std::uint8_t { Count = 0, Total = 1, Value = 2 };
inline constexpr std::array<Method, 3> kAllMethods = {Method::Count, Method::Total, Method::Value};

// `All` labels context-merged (narrow) results; accrual only ever produces
// the first three.
enum class Context : std::uint8_t { Positive = 0, Negative = 1, Neutral = 2, All = 3 };
inline constexpr std::array<Context, 3> kAccrualContexts = {Context::Positive, Context::Negative,
                                                            Context::Neutral};

constexpr std::string_view to_string(Method m) {
    switch (m) {
        case Method::Count: return "Count";
        case Method::Total: return "Total";
        case Method::Value: return "Value";
    }
    return "?";
}

constexpr std::string_view to_string(Context c) {
    switch (c) {
        case Context::Positive: return "Positive";
        case Context::Negative: return "Negative";
        case Context::Neutral: return "Neutral";
        case Context::All: return "All";
    }
    return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
    for (Method m : kAllMethods) {
        if (csv::iequals(s, to_string(m))) return m;
    }
    return std::nullopt;
}

inline std::optional<Context> parse_context(std::string_view s) {
    for (Context c : {Context::Positive, Context::Negative, Context::Neutral, Context::All}) {
        if (csv::iequals(s, to_string(c))) return c;
    }
    return std::nullopt;
}

struct Tally {
    double rg = 0;
    double rl = 0;
    double pg = 0;
    double pl = 0;

    Tally& operator+=(const Tally& o) {
        rg += o.rg;
        rl += o.rl;
        pg += o.pg;
        pl += o.pl;
        return *this;
    }
    friend Tally operator+(Tally a, const Tally& b) { return a += b; }
    friend bool operator==(const Tally&, const Tally&) = default;

    bool empty() const { return rg == 0 && rl == 0 && pg == 0 && pl == 0; }
};

using MethodTallies = std::array<Tally, 3>;        // indexed by Method
using ContextTallies = std::array<MethodTallies, 3>;  // indexed by Context (Positive..Neutral)

inline MethodTallies& operator+=(MethodTallies& a, const MethodTallies& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

// ---------------------------------------------------------------------------
// Returns
// ---------------------------------------------------------------------------

// Fractional return of a position at `price` against `reference`:
// (p - r) / r for long exposure, (r - p) / r for short exposure.
inline Rational signed_return(const Rational& reference, Price price, bool long_exposure) {
    const Rational r = (Rational(price.ticks()) - reference) / reference;
    return long_exposure ? r : -r;
}

struct ReturnSign {
    int sign = 0;
    double magnitude = 0;  // |return|
};

// Same value as signed_return, without normalizing the intermediate fraction.
inline ReturnSign evaluate_return(const Rational& reference, Price price, bool long_exposure) {
    int128 num;
    try {
        num = detail::sub(detail::mul(static_cast<int128>(price.ticks()), reference.den()),
                          reference.num());
    } catch (const ArithmeticOverflow&) {
        const Rational r = signed_return(reference, price, long_exposure);
        return {r.sign(), std::abs(r.to_double())};
    }
    if (!long_exposure) num = -num;
    const int s = (num > 0) - (num < 0);
    if (s == 0) return {};
    return {s, ratio_to_double(num < 0 ? -num : num, reference.num())};
}

// ---------------------------------------------------------------------------
// Per-investor tally storage
// ---------------------------------------------------------------------------

class InvestorTallies {
public:
    MethodTallies& at(AssetIndex asset, Context ctx) {
        auto it = std::lower_bound(rows_.begin(), rows_.end(), asset,
                                   [](const auto& row, AssetIndex a) { return row.first < a; });
        if (it == rows_.end() || it->first != asset) it = rows_.insert(it, {asset, ContextTallies{}});
        return it->second[static_cast<std::size_t>(ctx)];
    }

    // Rows ordered by asset index.
    std::span<const std::pair<AssetIndex, ContextTallies>> rows() const { return rows_; }

    friend bool operator==(const InvestorTallies&, const InvestorTallies&) = default;

private:
    std::vector<std::pair<AssetIndex, ContextTallies>> rows_;
};

// ---------------------------------------------------------------------------
// Accrual
// ---------------------------------------------------------------------------

namespace detail {
inline void add_component(MethodTallies& t, double Tally::*field, double units, double magnitude) {
    t[static_cast<std::size_t>(Method::Count)].*field += 1.0;
    t[static_cast<std::size_t>(Method::Total)].*field += units;
    t[static_cast<std::size_t>(Method::Value)].*field += magnitude;
}
}  // namespace detail

// Accrues one investor event. The realization leg (if any) goes to RG/RL of
// the traded asset; when `evaluate_paper` is set every open position goes to
// PG/PL of its own asset. All increments carry the event's context.
// `price_of(asset)` returns std::optional<Price>.
template <class PriceLookup>
void accrue_event(InvestorTallies& tallies, const std::optional<RealizationLeg>& leg,
                  std::span<const Position> open, PriceLookup&& price_of, Context ctx,
                  bool evaluate_paper = true) {
    if (leg) {
        const ReturnSign r = evaluate_return(leg->reference, leg->execution_price,
                                             leg->direction == Direction::ClosedLong);
        if (r.sign != 0) {
            detail::add_component(tallies.at(leg->asset, ctx), r.sign > 0 ? &Tally::rg : &Tally::rl,
                                  static_cast<double>(leg->quantity_closed), r.magnitude);
        }
    }
    if (!evaluate_paper) return;
    for (const Position& p : open) {
        const std::optional<Price> market = price_of(p.asset);
        if (!market) {
            throw Error(ErrorKind::MissingPrice, "no market price for asset index " +
                                                     std::to_string(p.asset));
        }
        const ReturnSign r = evaluate_return(p.reference, *market, p.is_long());
        if (r.sign == 0) continue;
        detail::add_component(tallies.at(p.asset, ctx), r.sign > 0 ? &Tally::pg : &Tally::pl,
                              static_cast<double>(std::abs(p.signed_quantity)), r.magnitude);
    }
}

enum class ContextRule : std::uint8_t { ExcludeTradedAsset, IncludeTradedAsset };

// Sign of the summed unrealized P&L of the investor's open positions (the
// traded asset excluded unless the rule says otherwise). No positions or an
// exact zero balance gives Neutral.
template <class PriceLookup>
Context classify_context(std::span<const Position> open, AssetIndex traded, PriceLookup&& price_of,
                         ContextRule rule = ContextRule::ExcludeTradedAsset) {
    int128 integral = 0;  // fast path while every reference is a whole tick
    Rational exact;
    long double approx = 0;
    enum { Integral, Exact, Approx } mode = Integral;
    for (const Position& p : open) {
        if (rule == ContextRule::ExcludeTradedAsset && p.asset == traded) continue;
        const std::optional<Price> market = price_of(p.asset);
        if (!market) {
            throw Error(ErrorKind::MissingPrice, "no market price for asset index " +
                                                     std::to_string(p.asset));
        }
        if (mode == Integral && p.reference.den() == 1) {
            try {
                integral = detail::add(
                    integral, detail::mul(detail::sub(market->ticks(), p.reference.num()),
                                          static_cast<int128>(p.signed_quantity)));
                continue;
            } catch (const ArithmeticOverflow&) {
            }
        }
        if (mode == Integral) {
            exact = Rational(integral);
            mode = Exact;
        }
        if (mode == Exact) {
            try {
                exact = exact + unrealized_pnl(p, *market);
                continue;
            } catch (const ArithmeticOverflow&) {
                approx = exact.to_long_double();
                mode = Approx;
            }
        }
        approx += (static_cast<long double>(market->ticks()) - p.reference.to_long_double()) *
                  static_cast<long double>(p.signed_quantity);
    }
    int s = 0;
    switch (mode) {
        case Integral: s = (integral > 0) - (integral < 0); break;
        case Exact: s = exact.sign(); break;
        case Approx: s = (approx > 0) - (approx < 0); break;
    }
    return s > 0 ? Context::Positive : (s < 0 ? Context::Negative : Context::Neutral);
}

// ---------------------------------------------------------------------------
// Disposition effect
// ---------------------------------------------------------------------------

enum class ZeroDenominator : std::uint8_t {
    Exclude,  // ratio undefined -> record undefined
    Zero,     // an empty side contributes a ratio of 0
};

enum class ValueAggregation : std::uint8_t {
    Sum,   // Value components are summed returns
    Mean,  // Value components are divided by the matching event counts
};

struct DeValue {
    double de = 0;
    bool defined = false;
};

// DE = RG/(RG+PG) - RL/(RL+PL).
inline DeValue compute_de(const Tally& t, ZeroDenominator policy = ZeroDenominator::Exclude) {
    const double gains = t.rg + t.pg;
    const double losses = t.rl + t.pl;
    if (gains > 0 && losses > 0) return {t.rg / gains - t.rl / losses, true};
    if (policy == ZeroDenominator::Exclude || t.empty()) return {0, false};
    const double g = gains > 0 ? t.rg / gains : 0.0;
    const double l = losses > 0 ? t.rl / losses : 0.0;
    return {g - l, true};
}

// Value tally turned into per-event mean returns using the Count tally.
inline Tally mean_value_tally(const Tally& value, const Tally& count) {
    auto div = [](double v, double n) { return n > 0 ? v / n : 0.0; };
    return {div(value.rg, count.rg), div(value.rl, count.rl), div(value.pg, count.pg),
            div(value.pl, count.pl)};
}

inline DeValue compute_de(const MethodTallies& t, Method m, ZeroDenominator policy,
                          ValueAggregation value_agg) {
    const auto& tally = t[static_cast<std::size_t>(m)];
    if (m == Method::Value && value_agg == ValueAggregation::Mean) {
        return compute_de(mean_value_tally(tally, t[static_cast<std::size_t>(Method::Count)]), policy);
    }
    return compute_de(tally, policy);
}

}  // namespace dispo
