#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dispo/csv.hpp"
#include "dispo/error.hpp"
#include "dispo/types.hpp"

namespace dispo {

struct ParseOptions {
    // Skip malformed rows (recording them) instead of aborting.
    bool lenient = false;
};

struct ParsedTransactions {
    std::vector<Transaction> transactions;  // sorted by (timestamp, seq)
    std::vector<RowError> rejects;
    std::size_t rows = 0;  // data rows seen, excluding header and blank lines
};

using InstrumentRegistry = std::map<std::string, Instrument, std::less<>>;

namespace detail {

inline constexpr std::array<std::string_view, 6> kTransactionColumns = {
    "investor_id", "asset_id", "side", "quantity", "price", "timestamp"};

inline std::optional<Side> parse_side(std::string_view s) {
    if (s == "B" || s == "b") return Side::Buy;
    if (s == "S" || s == "s") return Side::Sell;
    const std::string l = csv::lower(s);
    if (l == "buy") return Side::Buy;
    if (l == "sell") return Side::Sell;
    return std::nullopt;
}

inline std::optional<std::int64_t> parse_quantity(std::string_view s) {
    std::int64_t v = 0;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

template <std::size_t N>
std::array<std::size_t, N> locate_columns(std::string_view header_line,
                                          const std::array<std::string_view, N>& names) {
    std::vector<std::string_view> fields;
    std::string scratch;
    if (!csv::split(header_line, fields, scratch)) {
        throw Error(ErrorKind::SchemaError, "unreadable header row");
    }
    std::array<std::size_t, N> index{};
    for (std::size_t c = 0; c < N; ++c) {
        auto it = std::find_if(fields.begin(), fields.end(),
                               [&](std::string_view f) { return csv::lower(f) == names[c]; });
        if (it == fields.end()) {
            throw Error(ErrorKind::SchemaError,
                        "missing required column '" + std::string(names[c]) + "'");
        }
        index[c] = static_cast<std::size_t>(it - fields.begin());
    }
    return index;
}

}  // namespace detail

// Parses a transaction log. Rows get `seq` in input order (counting accepted
// rows only) and the result is stably ordered by (timestamp, seq).
inline ParsedTransactions parse_transactions(std::string_view text, const ParseOptions& opts = {}) {
    csv::LineReader lines(text);
    std::string_view line;
    bool have_header = false;
    while (lines.next(line)) {
        if (!csv::trim(line).empty()) {
            have_header = true;
            break;
        }
    }
    if (!have_header) throw Error(ErrorKind::SchemaError, "missing header row");
    const auto col = detail::locate_columns(line, detail::kTransactionColumns);
    const std::size_t needed = *std::max_element(col.begin(), col.end()) + 1;

    ParsedTransactions out;
    std::vector<std::string_view> f;
    std::string scratch;
    auto reject = [&](std::string reason) {
        RowError e{lines.line_number(), std::move(reason)};
        if (!opts.lenient) throw malformed_row(e);
        out.rejects.push_back(std::move(e));
    };

    while (lines.next(line)) {
        if (csv::trim(line).empty()) continue;
        ++out.rows;
        if (!csv::split(line, f, scratch)) {
            reject("unterminated quote");
            continue;
        }
        if (f.size() < needed) {
            reject("expected at least " + std::to_string(needed) + " fields, got " +
                   std::to_string(f.size()));
            continue;
        }
        Transaction tx;
        const std::string_view investor = f[col[0]];
        const std::string_view asset = f[col[1]];
        if (investor.empty()) {
            reject("empty investor_id");
            continue;
        }
        if (asset.empty()) {
            reject("empty asset_id");
            continue;
        }
        const auto side = detail::parse_side(f[col[2]]);
        if (!side) {
            reject("side must be B or S, got '" + std::string(f[col[2]]) + "'");
            continue;
        }
        const auto qty = detail::parse_quantity(f[col[3]]);
        if (!qty) {
            reject("quantity must be a whole number, got '" + std::string(f[col[3]]) + "'");
            continue;
        }
        if (*qty <= 0) {
            reject("quantity must be positive, got '" + std::string(f[col[3]]) + "'");
            continue;
        }
        const auto price = parse_price(f[col[4]]);
        if (!price) {
            reject("unreadable price '" + std::string(f[col[4]]) + "'");
            continue;
        }
        if (price->ticks() <= 0) {
            reject("price must be positive, got '" + std::string(f[col[4]]) + "'");
            continue;
        }
        const auto ts = parse_timestamp(f[col[5]]);
        if (!ts) {
            reject("unreadable timestamp '" + std::string(f[col[5]]) + "'");
            continue;
        }
        tx.investor_id.assign(investor);
        tx.asset_id.assign(asset);
        tx.side = *side;
        tx.quantity = *qty;
        tx.price = *price;
        tx.timestamp = *ts;
        tx.seq = out.transactions.size();
        out.transactions.push_back(std::move(tx));
    }

    // seq already follows input order, so a plain sort on (timestamp, seq)
    // is the stable chronological order.
    std::sort(out.transactions.begin(), out.transactions.end(),
              [](const Transaction& a, const Transaction& b) {
                  return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.seq < b.seq;
              });
    return out;
}

inline ParsedTransactions parse_transactions(std::istream& in, const ParseOptions& opts = {}) {
    const std::string text = csv::slurp(in);
    return parse_transactions(std::string_view(text), opts);
}

inline void write_transactions(std::ostream& out, std::span<const Transaction> txs) {
    out << "investor_id,asset_id,side,quantity,price,timestamp\n";
    std::string line;
    for (const auto& tx : txs) {
        line.clear();
        line += csv::escape(tx.investor_id);
        line += ',';
        line += csv::escape(tx.asset_id);
        line += ',';
        line += side_code(tx.side);
        line += ',';
        line += std::to_string(tx.quantity);
        line += ',';
        line += format_price(tx.price);
        line += ',';
        line += format_timestamp(tx.timestamp);
        line += '\n';
        out << line;
    }
}

// ---------------------------------------------------------------------------
// Instrument registry
// ---------------------------------------------------------------------------

inline InstrumentRegistry parse_instruments(std::string_view text) {
    static constexpr std::array<std::string_view, 3> kColumns = {"asset_id", "underlying_id",
                                                                 "leverage"};
    csv::LineReader lines(text);
    std::string_view line;
    bool have_header = false;
    while (lines.next(line)) {
        if (!csv::trim(line).empty()) {
            have_header = true;
            break;
        }
    }
    if (!have_header) throw Error(ErrorKind::SchemaError, "missing header row in registry");
    const auto col = detail::locate_columns(line, kColumns);
    const std::size_t needed = *std::max_element(col.begin(), col.end()) + 1;

    InstrumentRegistry registry;
    std::vector<std::string_view> f;
    std::string scratch;
    while (lines.next(line)) {
        if (csv::trim(line).empty()) continue;
        const std::size_t ln = lines.line_number();
        if (!csv::split(line, f, scratch) || f.size() < needed) {
            throw malformed_row({ln, "registry row has too few fields"});
        }
        std::string_view lev_text = f[col[2]];
        if (!lev_text.empty() && (lev_text.back() == 'x' || lev_text.back() == 'X')) {
            lev_text.remove_suffix(1);
        }
        if (!lev_text.empty() && lev_text.front() == '+') lev_text.remove_prefix(1);
        double lev = 0;
        auto [ptr, ec] = std::from_chars(lev_text.data(), lev_text.data() + lev_text.size(), lev);
        if (ec != std::errc() || ptr != lev_text.data() + lev_text.size() || !std::isfinite(lev)) {
            throw malformed_row({ln, "unreadable leverage '" + std::string(f[col[2]]) + "'"});
        }
        Instrument inst{std::string(f[col[0]]), std::string(f[col[1]]), lev};
        if (inst.asset_id.empty()) throw malformed_row({ln, "empty asset_id"});
        if (lev == 0) throw Error(ErrorKind::ZeroLeverage, inst.asset_id);
        if (registry.contains(inst.asset_id)) throw Error(ErrorKind::DuplicateAsset, inst.asset_id);
        registry.emplace(inst.asset_id, std::move(inst));
    }
    return registry;
}

inline InstrumentRegistry parse_instruments(std::istream& in) {
    const std::string text = csv::slurp(in);
    return parse_instruments(std::string_view(text));
}

inline void write_instruments(std::ostream& out, const InstrumentRegistry& registry) {
    out << "asset_id,underlying_id,leverage\n";
    for (const auto& [id, inst] : registry) {
        out << csv::escape(inst.asset_id) << ',' << csv::escape(inst.underlying_id) << ','
            << format_double(inst.leverage) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Descriptive summary
// ---------------------------------------------------------------------------

struct DatasetSummary {
    std::size_t n_investors = 0;
    std::size_t n_assets = 0;
    std::size_t n_transactions = 0;
    double median_transactions_per_investor = 0;
    double median_transactions_per_month = 0;  // over investors with a non-zero horizon
    double median_assets_per_investor = 0;
    double median_account_horizon_years = 0;
    double median_holding_days_per_asset = 0;  // over (investor, asset) pairs
};

inline DatasetSummary summarize(std::span<const Transaction> txs) {
    if (txs.empty()) throw Error(ErrorKind::EmptyDataset, "no transactions to summarize");

    struct Span {
        Timestamp first{INT64_MAX};
        Timestamp last{INT64_MIN};
        void add(Timestamp t) {
            first = std::min(first, t);
            last = std::max(last, t);
        }
        double days() const {
            return static_cast<double>(last.ns - first.ns) / static_cast<double>(Timestamp::kNsPerDay);
        }
    };
    struct PerInvestor {
        std::size_t count = 0;
        Span span;
        std::map<std::string_view, Span> assets;
    };

    std::map<std::string_view, PerInvestor> investors;
    std::set<std::string_view> assets;
    for (const auto& tx : txs) {
        auto& inv = investors[tx.investor_id];
        ++inv.count;
        inv.span.add(tx.timestamp);
        inv.assets[tx.asset_id].add(tx.timestamp);
        assets.insert(tx.asset_id);
    }

    constexpr double kDaysPerYear = 365.25;
    std::vector<double> counts, per_month, n_assets, horizons, holdings;
    for (const auto& [id, inv] : investors) {
        counts.push_back(static_cast<double>(inv.count));
        n_assets.push_back(static_cast<double>(inv.assets.size()));
        const double years = inv.span.days() / kDaysPerYear;
        horizons.push_back(years);
        if (years > 0) per_month.push_back(static_cast<double>(inv.count) / (years * 12.0));
        for (const auto& [a, s] : inv.assets) holdings.push_back(s.days());
    }

    DatasetSummary s;
    s.n_investors = investors.size();
    s.n_assets = assets.size();
    s.n_transactions = txs.size();
    s.median_transactions_per_investor = median(counts);
    s.median_transactions_per_month = median(per_month);
    s.median_assets_per_investor = median(n_assets);
    s.median_account_horizon_years = median(horizons);
    s.median_holding_days_per_asset = median(holdings);
    return s;
}

namespace detail {
inline std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}
}  // namespace detail

// Two-column "Metric / Median Value" table.
inline std::string render_summary(const DatasetSummary& s) {
    const std::vector<std::pair<std::string, std::string>> rows = {
        {"Number of transactions",
         detail::fixed(s.median_transactions_per_investor, 0) + " (" +
             detail::fixed(s.median_transactions_per_month, 0) + " per month)"},
        {"Number of different assets traded",
         detail::fixed(s.median_assets_per_investor, 0) + " per investor"},
        {"Client account time horizon (years)", detail::fixed(s.median_account_horizon_years, 2)},
        {"Holding time horizon per asset (days)", detail::fixed(s.median_holding_days_per_asset, 1)},
    };
    std::size_t w0 = std::string_view("Metric").size();
    std::size_t w1 = std::string_view("Median Value").size();
    for (const auto& [a, b] : rows) {
        w0 = std::max(w0, a.size());
        w1 = std::max(w1, b.size());
    }
    const std::string rule(w0 + 2 + w1, '-');
    auto row = [&](const std::string& a, const std::string& b) {
        return a + std::string(w0 - a.size() + 2, ' ') + std::string(w1 - b.size(), ' ') + b + "\n";
    };
    std::string out = rule + "\n" + row("Metric", "Median Value") + rule + "\n";
    for (const auto& [a, b] : rows) out += row(a, b);
    out += rule + "\n";
    out += "investors: " + std::to_string(s.n_investors) + ", assets: " + std::to_string(s.n_assets) +
           ", transactions: " + std::to_string(s.n_transactions) + "\n";
    return out;
}

}  // namespace dispo
