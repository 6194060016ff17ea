#pragma once

// Group comparisons of disposition-effect records and the tables that
// present them: rows "A = B", one column per method, star legend footer.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <functional>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dispo/aggregate.hpp"
#include "dispo/csv.hpp"
#include "dispo/error.hpp"
#include "dispo/ingest.hpp"
#include "dispo/stats.hpp"

namespace dispo {

// "1x", "-7x", "0.5x".
inline std::string leverage_label(double leverage) { return format_double(leverage) + "x"; }

struct GroupFilter {
    std::optional<double> leverage;
    std::optional<int> exposure;  // +1 long, -1 short
    std::optional<Context> context;
    std::optional<std::string> asset_id;
    std::optional<std::string> underlying_id;

    bool matches(const DeRecord& r, const InstrumentRegistry& registry) const {
        if (!r.defined) return false;
        if (context && r.context != *context) return false;
        if (asset_id && r.asset_id != *asset_id) return false;
        if (leverage || exposure || underlying_id) {
            auto it = registry.find(r.asset_id);
            if (it == registry.end()) return false;
            const Instrument& inst = it->second;
            if (leverage && inst.leverage != *leverage) return false;
            if (exposure && (inst.leverage > 0 ? 1 : -1) != *exposure) return false;
            if (underlying_id && inst.underlying_id != *underlying_id) return false;
        }
        return true;
    }

    std::string describe() const {
        std::vector<std::string> parts;
        if (leverage) parts.push_back("lev=" + format_double(*leverage));
        if (exposure) parts.push_back(*exposure > 0 ? "exposure=long" : "exposure=short");
        if (context) parts.push_back("ctx=" + csv::lower(to_string(*context)));
        if (asset_id) parts.push_back("asset=" + *asset_id);
        if (underlying_id) parts.push_back("underlying=" + *underlying_id);
        if (parts.empty()) return "all";
        std::string out = parts[0];
        for (std::size_t i = 1; i < parts.size(); ++i) out += "," + parts[i];
        return out;
    }
};

// Parses "lev=3,ctx=positive", "exposure=short", "asset=ETF1S", "underlying=X".
inline GroupFilter parse_filter(std::string_view text) {
    GroupFilter f;
    std::vector<std::string_view> parts;
    std::string scratch;
    if (text.empty() || csv::trim(text) == "all") return f;
    csv::split(text, parts, scratch);
    for (std::string_view part : parts) {
        const auto eq = part.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorKind::SchemaError, "filter term '" + std::string(part) + "' lacks '='");
        }
        const std::string key = csv::lower(csv::trim(part.substr(0, eq)));
        std::string_view value = csv::trim(part.substr(eq + 1));
        if (key == "lev" || key == "leverage") {
            if (!value.empty() && (value.back() == 'x' || value.back() == 'X')) value.remove_suffix(1);
            if (!value.empty() && value.front() == '+') value.remove_prefix(1);
            double v = 0;
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc() || ptr != value.data() + value.size()) {
                throw Error(ErrorKind::SchemaError, "bad leverage in filter: " + std::string(value));
            }
            f.leverage = v;
        } else if (key == "ctx" || key == "context") {
            f.context = parse_context(value);
            if (!f.context) {
                throw Error(ErrorKind::SchemaError, "bad context in filter: " + std::string(value));
            }
        } else if (key == "exposure") {
            if (csv::iequals(value, "long")) {
                f.exposure = 1;
            } else if (csv::iequals(value, "short")) {
                f.exposure = -1;
            } else {
                throw Error(ErrorKind::SchemaError, "exposure must be long or short");
            }
        } else if (key == "asset") {
            f.asset_id = std::string(value);
        } else if (key == "underlying") {
            f.underlying_id = std::string(value);
        } else {
            throw Error(ErrorKind::SchemaError, "unknown filter key '" + key + "'");
        }
    }
    return f;
}

inline std::vector<double> select_values(std::span<const DeRecord> records, const GroupFilter& f,
                                         const InstrumentRegistry& registry) {
    std::vector<double> out;
    for (const auto& r : records) {
        if (f.matches(r, registry)) out.push_back(r.de);
    }
    return out;
}

// Mann-Whitney on the defined values selected by each filter.
inline TestResult compare_groups(std::span<const DeRecord> records, const GroupFilter& a,
                                 const GroupFilter& b, const InstrumentRegistry& registry,
                                 ModePolicy policy = ModePolicy::Auto) {
    const auto xa = select_values(records, a, registry);
    if (xa.empty()) throw Error(ErrorKind::EmptyGroup, a.describe());
    const auto xb = select_values(records, b, registry);
    if (xb.empty()) throw Error(ErrorKind::EmptyGroup, b.describe());
    return mann_whitney(xa, xb, policy);
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

struct ComparisonRow {
    std::string label;                            // "1x = 2x"
    std::array<std::optional<TestResult>, 3> cells;  // by Method; empty -> "n/a"
};

struct ComparisonSection {
    std::string title;       // optional banner line above the header
    std::string row_header;  // first-column header text
    std::vector<ComparisonRow> rows;
};

struct ComparisonTable {
    std::string caption;
    std::vector<ComparisonSection> sections;
};

inline std::string row_label(double first, double second) {
    return leverage_label(first) + " = " + leverage_label(second);
}

namespace detail {

inline std::string pad_right(std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
}

inline std::string pad_left(const std::string& s, std::size_t w) {
    return s.size() < w ? std::string(w - s.size(), ' ') + s : s;
}

inline std::string rstrip(std::string s) {
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s;
}

}  // namespace detail

// Plain-text rendering. Numbers are right-aligned on the decimal point with
// stars trailing; a rule of '=' separates sections and the legend closes the
// table.
inline std::string render_table(const ComparisonTable& table, int decimals = 3) {
    static constexpr std::array<std::string_view, 3> kHeaders = {"Count", "Total", "Value"};

    std::size_t label_w = 0;
    std::size_t num_w = 0;
    for (const auto& sec : table.sections) {
        label_w = std::max(label_w, sec.row_header.size());
        for (const auto& row : sec.rows) {
            label_w = std::max(label_w, row.label.size());
            for (const auto& c : row.cells) {
                if (!c) continue;
                TestResult bare = *c;
                bare.stars = Stars::None;
                num_w = std::max(num_w, format_cell(bare, decimals).size());
            }
        }
    }
    num_w = std::max<std::size_t>(num_w, 3);
    label_w += 4;
    const std::size_t cell_w = std::max<std::size_t>(num_w + 3, 5) + 3;
    const std::size_t width = label_w + 3 * cell_w;
    const std::string heavy(width, '=');
    const std::string light(width, '-');

    auto cell_text = [&](const std::optional<TestResult>& c) {
        if (!c) return detail::pad_left("n/a", num_w) + "   ";
        TestResult bare = *c;
        bare.stars = Stars::None;
        return detail::pad_left(format_cell(bare, decimals), num_w) +
               detail::pad_right(std::string(to_string(c->stars)), 3);
    };
    auto centered = [&](const std::string& s) {
        const std::size_t left = s.size() < width ? (width - s.size()) / 2 : 0;
        return std::string(left, ' ') + s;
    };

    std::string out;
    if (!table.caption.empty()) out += table.caption + "\n";
    out += heavy + "\n";
    for (std::size_t si = 0; si < table.sections.size(); ++si) {
        const auto& sec = table.sections[si];
        if (si > 0) out += heavy + "\n";
        if (!sec.title.empty()) {
            out += centered(sec.title) + "\n";
            out += light + "\n";
        }
        std::string header = detail::pad_right(sec.row_header, label_w);
        for (auto h : kHeaders) header += detail::pad_right(detail::pad_left(std::string(h), num_w), cell_w);
        out += detail::rstrip(header) + "\n";
        out += light + "\n";
        for (const auto& row : sec.rows) {
            std::string line = detail::pad_right(row.label, label_w);
            for (const auto& c : row.cells) line += detail::pad_right(cell_text(c), cell_w);
            out += detail::rstrip(line) + "\n";
        }
    }
    out += heavy + "\n";
    out += std::string(kStarLegend) + "\n";
    return out;
}

inline void write_table_csv(std::ostream& out, const ComparisonTable& table, int decimals = 3) {
    out << "section,row,method,n_first,n_second,median_first,median_second,median_diff,u,p_value,"
           "stars,mode,cell\n";
    for (const auto& sec : table.sections) {
        const std::string section = !sec.title.empty() ? sec.title : sec.row_header;
        for (const auto& row : sec.rows) {
            for (Method m : kAllMethods) {
                const auto& c = row.cells[static_cast<std::size_t>(m)];
                out << csv::escape(section) << ',' << csv::escape(row.label) << ',' << to_string(m)
                    << ',';
                if (!c) {
                    out << ",,,,,,,,,n/a\n";
                    continue;
                }
                out << c->n_first << ',' << c->n_second << ',' << format_double(c->median_first) << ','
                    << format_double(c->median_second) << ',' << format_double(c->median_diff) << ','
                    << format_double(c->u_statistic) << ',' << format_double(c->p_value) << ','
                    << to_string(c->stars) << ',' << to_string(c->mode) << ','
                    << format_cell(*c, decimals) << '\n';
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Preset layouts
// ---------------------------------------------------------------------------

enum class Preset : std::uint8_t {
    LeverageLong,    // long ETFs by leverage, split by portfolio context
    LeverageShort,   // inverse ETFs by leverage, split by portfolio context
    LongVsInverse,   // inverse vs long of equal magnitude, narrow framing
    ContextSplit,    // long vs inverse of equal magnitude, per portfolio context
    PortfolioState,  // same ETF group, negative vs positive portfolio
};

inline constexpr std::array<std::pair<std::string_view, Preset>, 5> kPresetNames = {{
    {"leverage-long", Preset::LeverageLong},
    {"leverage-short", Preset::LeverageShort},
    {"long-vs-inverse", Preset::LongVsInverse},
    {"context-split", Preset::ContextSplit},
    {"portfolio-state", Preset::PortfolioState},
}};

inline std::optional<Preset> parse_preset(std::string_view s) {
    for (auto [name, p] : kPresetNames) {
        if (name == s) return p;
    }
    return std::nullopt;
}

// Supplies DE records for a framing and method (per-asset level).
using RecordSource = std::function<const std::vector<DeRecord>&(Framing, Method)>;

struct TableOptions {
    ModePolicy mode = ModePolicy::Auto;
    bool skip_empty = false;  // render "n/a" instead of raising EmptyGroup
    std::vector<Method> methods = {Method::Count, Method::Total, Method::Value};
};

namespace detail {

struct PairSpec {
    std::string label;
    GroupFilter a;
    GroupFilter b;
};

inline ComparisonRow run_pair(const PairSpec& spec, Framing framing, const RecordSource& source,
                              const InstrumentRegistry& registry, const TableOptions& opts) {
    ComparisonRow row{spec.label, {}};
    for (Method m : opts.methods) {
        try {
            row.cells[static_cast<std::size_t>(m)] =
                compare_groups(source(framing, m), spec.a, spec.b, registry, opts.mode);
        } catch (const Error& e) {
            if (!opts.skip_empty || (e.kind() != ErrorKind::EmptyGroup &&
                                     e.kind() != ErrorKind::EmptySample)) {
                throw;
            }
        }
    }
    return row;
}

// Distinct leverages in the registry with the given sign, by magnitude.
inline std::vector<double> leverages(const InstrumentRegistry& registry, int sign) {
    std::set<double> s;
    for (const auto& [id, inst] : registry) {
        if ((inst.leverage > 0 ? 1 : -1) == sign) s.insert(std::abs(inst.leverage));
    }
    return {s.begin(), s.end()};
}

}  // namespace detail

inline ComparisonTable build_preset_table(Preset preset, const RecordSource& source,
                                          const InstrumentRegistry& registry,
                                          const TableOptions& opts = {}) {
    using detail::PairSpec;
    auto filter = [](double lev, std::optional<Context> ctx) {
        GroupFilter f;
        f.leverage = lev;
        f.context = ctx;
        return f;
    };
    const auto longs = detail::leverages(registry, 1);
    const auto shorts = detail::leverages(registry, -1);
    std::vector<double> both;
    std::set_intersection(longs.begin(), longs.end(), shorts.begin(), shorts.end(),
                          std::back_inserter(both));

    ComparisonTable table;
    switch (preset) {
        case Preset::LeverageLong:
        case Preset::LeverageShort: {
            const bool is_long = preset == Preset::LeverageLong;
            const auto& levels = is_long ? longs : shorts;
            const double sign = is_long ? 1.0 : -1.0;
            table.caption = std::string("Variations in disposition effect due to volatility: ") +
                            (is_long ? "Long case" : "Short case");
            for (Context ctx : {Context::Negative, Context::Positive}) {
                ComparisonSection sec{std::string(to_string(ctx)) + " Portfolio",
                                      is_long ? "Long ETF" : "Short ETF",
                                      {}};
                for (std::size_t i = 0; i < levels.size(); ++i) {
                    for (std::size_t j = i + 1; j < levels.size(); ++j) {
                        const double a = sign * levels[i], b = sign * levels[j];
                        sec.rows.push_back(detail::run_pair({row_label(a, b), filter(a, ctx), filter(b, ctx)},
                                                            Framing::Integrated, source, registry, opts));
                    }
                }
                table.sections.push_back(std::move(sec));
            }
            break;
        }
        case Preset::LongVsInverse: {
            table.caption = "Disposition effect differences between long and inverse ETFs";
            ComparisonSection sec{"", "ETF", {}};
            for (double m : both) {
                sec.rows.push_back(detail::run_pair(
                    {row_label(-m, m), filter(-m, std::nullopt), filter(m, std::nullopt)},
                    Framing::Narrow, source, registry, opts));
            }
            table.sections.push_back(std::move(sec));
            break;
        }
        case Preset::ContextSplit: {
            table.caption = "Differences in long/short disposition effect: Integrated framing";
            for (Context ctx : {Context::Positive, Context::Negative}) {
                ComparisonSection sec{"", std::string(to_string(ctx)) + " Portfolio", {}};
                for (double m : both) {
                    sec.rows.push_back(detail::run_pair({row_label(m, -m), filter(m, ctx), filter(-m, ctx)},
                                                        Framing::Integrated, source, registry, opts));
                }
                table.sections.push_back(std::move(sec));
            }
            break;
        }
        case Preset::PortfolioState: {
            table.caption = "Differences in ETFs' groups disposition effect: Negative vs Positive portfolio";
            for (int sign : {-1, 1}) {
                const auto& levels = sign < 0 ? shorts : longs;
                ComparisonSection sec{std::string(sign < 0 ? "Short" : "Long") +
                                          " ETFs tested in Negative vs Positive Portfolio",
                                      "",
                                      {}};
                for (double m : levels) {
                    const double lev = sign * m;
                    sec.rows.push_back(detail::run_pair(
                        {row_label(lev, lev), filter(lev, Context::Negative), filter(lev, Context::Positive)},
                        Framing::Integrated, source, registry, opts));
                }
                table.sections.push_back(std::move(sec));
            }
            break;
        }
    }
    return table;
}

// Single custom comparison "A = B" on one framing.
inline ComparisonTable build_custom_table(const GroupFilter& a, const GroupFilter& b, Framing framing,
                                          const RecordSource& source,
                                          const InstrumentRegistry& registry,
                                          const TableOptions& opts = {}) {
    ComparisonTable table;
    table.caption = "Disposition effect comparison (" + std::string(to_string(framing)) + " framing)";
    ComparisonSection sec{"", "Groups", {}};
    sec.rows.push_back(detail::run_pair({a.describe() + " = " + b.describe(), a, b}, framing, source,
                                        registry, opts));
    table.sections.push_back(std::move(sec));
    return table;
}

}  // namespace dispo
