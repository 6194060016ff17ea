#pragma once

// Brute-force reference for the streaming engine. For every transaction it
// rebuilds the trading investor's portfolio by replaying that investor's
// whole prefix, looks market prices up by scanning the full prefix of the
// log, and re-derives context and gain/loss classification from scratch.
// Nothing is carried between events except the tallies themselves. Cost is
// cubic in the number of events; keep inputs to a few hundred rows.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "dispo/engine.hpp"
#include "dispo/metrics.hpp"
#include "dispo/rational.hpp"
#include "dispo/types.hpp"

namespace dispo::synth {

using TallyKey = std::tuple<std::string, std::string, Context>;  // investor, asset, context
using KeyedTallies = std::map<TallyKey, MethodTallies>;

struct OracleOptions {
    EvalScope eval_scope = EvalScope::EveryEvent;
    ContextRule context_rule = ContextRule::ExcludeTradedAsset;
};

namespace detail {

struct Holding {
    std::int64_t qty = 0;
    Rational ref;
};

struct Closing {
    std::int64_t qty = 0;
    Rational ref;
    bool was_long = true;
};

// Replays txs[0..last] restricted to `investor`; returns the holdings after
// txs[last] and what txs[last] closed, if anything.
inline std::pair<std::map<std::string, Holding>, std::optional<Closing>> replay_investor(
    std::span<const Transaction> txs, std::size_t last, const std::string& investor) {
    std::map<std::string, Holding> book;
    std::optional<Closing> closing;
    for (std::size_t j = 0; j <= last; ++j) {
        const Transaction& tx = txs[j];
        if (tx.investor_id != investor) continue;
        closing.reset();
        Holding& h = book[tx.asset_id];
        const std::int64_t signed_qty = tx.side == Side::Buy ? tx.quantity : -tx.quantity;
        const Rational px(tx.price.ticks());
        if (h.qty == 0) {
            h = {signed_qty, px};
        } else if ((h.qty > 0 && signed_qty > 0) || (h.qty < 0 && signed_qty < 0)) {
            const std::int64_t a = h.qty < 0 ? -h.qty : h.qty;
            h.ref = (h.ref * Rational(a) + px * Rational(tx.quantity)) / Rational(a + tx.quantity);
            h.qty += signed_qty;
        } else {
            const std::int64_t a = h.qty < 0 ? -h.qty : h.qty;
            closing = Closing{a < tx.quantity ? a : tx.quantity, h.ref, h.qty > 0};
            const std::int64_t after = h.qty + signed_qty;
            if (after != 0 && ((after > 0) != (h.qty > 0))) h.ref = px;
            h.qty = after;
        }
        if (h.qty == 0) book.erase(tx.asset_id);
    }
    return {std::move(book), closing};
}

inline Price last_price(std::span<const Transaction> txs, std::size_t last, const std::string& asset) {
    for (std::size_t j = last + 1; j-- > 0;) {
        if (txs[j].asset_id == asset) return txs[j].price;
    }
    throw Error(ErrorKind::MissingPrice, asset);
}

inline void bump(MethodTallies& t, double Tally::*field, double units, const Rational& ret) {
    const double mag = (ret.sign() < 0 ? -ret : ret).to_double();
    t[0].*field += 1.0;
    t[1].*field += units;
    t[2].*field += mag;
}

}  // namespace detail

// `txs` must be ordered by (timestamp, seq), as parse_transactions returns.
inline KeyedTallies oracle_replay(std::span<const Transaction> txs, const OracleOptions& opts = {}) {
    KeyedTallies out;
    for (std::size_t i = 0; i < txs.size(); ++i) {
        const Transaction& tx = txs[i];
        const auto [book, closing] = detail::replay_investor(txs, i, tx.investor_id);

        Rational balance;
        for (const auto& [asset, h] : book) {
            if (opts.context_rule == ContextRule::ExcludeTradedAsset && asset == tx.asset_id) continue;
            const Rational market(detail::last_price(txs, i, asset).ticks());
            balance = balance + (market - h.ref) * Rational(h.qty);
        }
        const Context ctx = balance.sign() > 0   ? Context::Positive
                            : balance.sign() < 0 ? Context::Negative
                                                 : Context::Neutral;

        if (closing) {
            const Rational exec(tx.price.ticks());
            Rational ret = (exec - closing->ref) / closing->ref;
            if (!closing->was_long) ret = -ret;
            if (ret.sign() != 0) {
                auto& t = out[{tx.investor_id, tx.asset_id, ctx}];
                detail::bump(t, ret.sign() > 0 ? &Tally::rg : &Tally::rl,
                             static_cast<double>(closing->qty), ret);
            }
        }

        if (opts.eval_scope == EvalScope::SellsOnly && tx.side != Side::Sell) continue;
        for (const auto& [asset, h] : book) {
            const Rational market(detail::last_price(txs, i, asset).ticks());
            Rational ret = (market - h.ref) / h.ref;
            if (h.qty < 0) ret = -ret;
            if (ret.sign() == 0) continue;
            auto& t = out[{tx.investor_id, asset, ctx}];
            detail::bump(t, ret.sign() > 0 ? &Tally::pg : &Tally::pl,
                         static_cast<double>(h.qty < 0 ? -h.qty : h.qty), ret);
        }
    }
    return out;
}

// Engine output in the oracle's keyed form (empty tallies dropped).
inline KeyedTallies keyed(const TallyTable& table, const Dataset& data) {
    KeyedTallies out;
    for (std::size_t inv = 0; inv < table.by_investor.size(); ++inv) {
        for (const auto& [asset, ct] : table.by_investor[inv].rows()) {
            for (Context c : kAccrualContexts) {
                const MethodTallies& t = ct[static_cast<std::size_t>(c)];
                if (t[0].empty() && t[1].empty() && t[2].empty()) continue;
                out[{data.investor_id(static_cast<InvestorIndex>(inv)), data.asset_id(asset), c}] = t;
            }
        }
    }
    return out;
}

}  // namespace dispo::synth
