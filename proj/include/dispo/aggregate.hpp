#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dispo/engine.hpp"
#include "dispo/error.hpp"
#include "dispo/metrics.hpp"
#include "dispo/types.hpp"

namespace dispo {

enum class Framing : std::uint8_t {
    Narrow,      // contexts merged
    Wide,        // split by context, investor level
    Integrated,  // split by context, asset level
};

enum class Level : std::uint8_t { PerAsset, InvestorPooled, InvestorMeanOfAssets };

constexpr std::string_view to_string(Framing f) {
    switch (f) {
        case Framing::Narrow: return "narrow";
        case Framing::Wide: return "wide";
        case Framing::Integrated: return "integrated";
    }
    return "?";
}

constexpr std::string_view to_string(Level l) {
    switch (l) {
        case Level::PerAsset: return "asset";
        case Level::InvestorPooled: return "pooled";
        case Level::InvestorMeanOfAssets: return "mean";
    }
    return "?";
}

// Narrow and wide default to investor-level pooling, integrated to per asset.
constexpr Level default_level(Framing f) {
    return f == Framing::Integrated ? Level::PerAsset : Level::InvestorPooled;
}

inline constexpr std::string_view kPooledAsset = "*";

struct DeRecord {
    std::string investor_id;
    std::string asset_id;  // kPooledAsset for investor-level records
    Context context = Context::All;
    Method method = Method::Count;
    double de = 0;
    bool defined = false;

    friend bool operator==(const DeRecord&, const DeRecord&) = default;
};

struct AggregateOptions {
    ZeroDenominator zero_denominator = ZeroDenominator::Exclude;
    ValueAggregation value_aggregation = ValueAggregation::Sum;
};

namespace detail {

inline bool method_empty(const MethodTallies& t, Method m) {
    return t[static_cast<std::size_t>(m)].empty();
}

}  // namespace detail

// Turns accrued tallies into disposition-effect records. Narrow framing sums
// the Positive, Negative and Neutral tallies of each key; wide and integrated
// framing emit Positive and Negative records only. Pooled levels sum tallies
// across assets before the ratio; the mean level averages the defined
// per-asset values. Output is ordered by (investor, asset, context).
inline std::vector<DeRecord> aggregate(const TallyTable& table,
                                       const std::vector<std::string>& investor_ids,
                                       const std::vector<std::string>& asset_ids, Level level,
                                       Framing framing, Method method,
                                       const AggregateOptions& opts = {}) {
    std::vector<DeRecord> out;
    std::vector<Context> contexts;
    if (framing == Framing::Narrow) {
        contexts = {Context::All};
    } else {
        contexts = {Context::Positive, Context::Negative};
    }

    auto tally_for = [](const ContextTallies& ct, Context c) {
        if (c != Context::All) return ct[static_cast<std::size_t>(c)];
        MethodTallies sum{};
        for (Context k : kAccrualContexts) sum += ct[static_cast<std::size_t>(k)];
        return sum;
    };
    auto de_of = [&](const MethodTallies& t) {
        return compute_de(t, method, opts.zero_denominator, opts.value_aggregation);
    };

    for (std::size_t inv = 0; inv < table.by_investor.size(); ++inv) {
        const auto rows = table.by_investor[inv].rows();
        if (level == Level::PerAsset) {
            for (const auto& [asset, ct] : rows) {
                for (Context c : contexts) {
                    const MethodTallies t = tally_for(ct, c);
                    if (detail::method_empty(t, method)) continue;
                    const DeValue v = de_of(t);
                    out.push_back({investor_ids[inv], asset_ids[asset], c, method, v.de, v.defined});
                }
            }
            continue;
        }
        for (Context c : contexts) {
            if (level == Level::InvestorPooled) {
                MethodTallies pooled{};
                bool any = false;
                for (const auto& [asset, ct] : rows) {
                    const MethodTallies t = tally_for(ct, c);
                    if (detail::method_empty(t, method)) continue;
                    pooled += t;
                    any = true;
                }
                if (!any) continue;
                const DeValue v = de_of(pooled);
                out.push_back({investor_ids[inv], std::string(kPooledAsset), c, method, v.de,
                               v.defined});
            } else {
                double sum = 0;
                std::size_t n_defined = 0;
                bool any = false;
                for (const auto& [asset, ct] : rows) {
                    const MethodTallies t = tally_for(ct, c);
                    if (detail::method_empty(t, method)) continue;
                    any = true;
                    const DeValue v = de_of(t);
                    if (v.defined) {
                        sum += v.de;
                        ++n_defined;
                    }
                }
                if (!any) continue;
                out.push_back({investor_ids[inv], std::string(kPooledAsset), c, method,
                               n_defined > 0 ? sum / static_cast<double>(n_defined) : 0.0,
                               n_defined > 0});
            }
        }
    }
    return out;
}

inline std::vector<DeRecord> aggregate(const TallyTable& table, const Dataset& data, Level level,
                                       Framing framing, Method method,
                                       const AggregateOptions& opts = {}) {
    return aggregate(table, data.investor_ids(), data.asset_ids(), level, framing, method, opts);
}

// ---------------------------------------------------------------------------
// Histogram
// ---------------------------------------------------------------------------

struct HistogramBin {
    double lower = 0;
    std::size_t count = 0;

    friend bool operator==(const HistogramBin&, const HistogramBin&) = default;
};

// Counts values over half-open bins [edge, edge + width) tiling [-1, 1]; the
// top bin is closed at 1. Edges are snapped to 1e-12 so decimal widths give
// decimal edges.
inline std::vector<HistogramBin> histogram(std::span<const double> values, double bin_width) {
    if (!(bin_width > 0) || !std::isfinite(bin_width) || bin_width > 2.0) {
        throw Error(ErrorKind::InvalidBinWidth, "bin width must be in (0, 2], got " +
                                                    format_double(bin_width));
    }
    const auto n = static_cast<std::size_t>(std::ceil(2.0 / bin_width - 1e-9));
    auto edge = [&](std::size_t i) {
        return std::round((-1.0 + static_cast<double>(i) * bin_width) * 1e12) / 1e12;
    };
    std::vector<HistogramBin> bins(n);
    for (std::size_t i = 0; i < n; ++i) bins[i].lower = edge(i);
    for (double v : values) {
        if (!(v >= -1.0 && v <= 1.0)) continue;
        auto idx = static_cast<std::size_t>(
            std::clamp(std::floor((v + 1.0) / bin_width), 0.0, static_cast<double>(n - 1)));
        while (idx + 1 < n && edge(idx + 1) <= v) ++idx;
        while (idx > 0 && edge(idx) > v) --idx;
        ++bins[idx].count;
    }
    return bins;
}

inline std::vector<HistogramBin> histogram(std::span<const DeRecord> records, double bin_width) {
    std::vector<double> values;
    values.reserve(records.size());
    for (const auto& r : records) {
        if (r.defined) values.push_back(r.de);
    }
    return histogram(std::span<const double>(values), bin_width);
}

// ---------------------------------------------------------------------------
// Delimited output
// ---------------------------------------------------------------------------

inline void write_records(std::ostream& out, std::span<const DeRecord> records) {
    out << "investor_id,asset_id,context,method,de,defined\n";
    for (const auto& r : records) {
        out << csv::escape(r.investor_id) << ',' << csv::escape(r.asset_id) << ','
            << to_string(r.context) << ',' << to_string(r.method) << ','
            << (r.defined ? format_double(r.de) : std::string("NA")) << ','
            << (r.defined ? "true" : "false") << '\n';
    }
}

inline void write_histogram(std::ostream& out, std::span<const HistogramBin> bins) {
    out << "bin_edge,count\n";
    for (const auto& b : bins) out << format_double(b.lower) << ',' << b.count << '\n';
}

inline void write_tallies(std::ostream& out, const TallyTable& table,
                          const std::vector<std::string>& investor_ids,
                          const std::vector<std::string>& asset_ids) {
    out << "investor_id,asset_id,context,method,rg,rl,pg,pl\n";
    for (std::size_t inv = 0; inv < table.by_investor.size(); ++inv) {
        for (const auto& [asset, ct] : table.by_investor[inv].rows()) {
            for (Context c : kAccrualContexts) {
                for (Method m : kAllMethods) {
                    const Tally& t = ct[static_cast<std::size_t>(c)][static_cast<std::size_t>(m)];
                    if (t.empty()) continue;
                    out << csv::escape(investor_ids[inv]) << ',' << csv::escape(asset_ids[asset])
                        << ',' << to_string(c) << ',' << to_string(m) << ',' << format_double(t.rg)
                        << ',' << format_double(t.rl) << ',' << format_double(t.pg) << ','
                        << format_double(t.pl) << '\n';
                }
            }
        }
    }
}

}  // namespace dispo
