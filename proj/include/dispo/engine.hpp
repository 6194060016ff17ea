#pragma once

// Streaming accrual over a whole dataset.
//
// Every worker scans the full event stream to keep its own market tape
// current, but only advances the ledgers of the investors it owns
// (investor index modulo worker count). Each investor's tallies are written
// by exactly one worker, so results do not depend on the thread count.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "dispo/dataset.hpp"
#include "dispo/ledger.hpp"
#include "dispo/metrics.hpp"
#include "dispo/prices.hpp"

namespace dispo {

enum class EvalScope : std::uint8_t {
    EveryEvent,  // paper gains/losses evaluated at every trade
    SellsOnly,   // only at sell trades
};

struct EngineOptions {
    EvalScope eval_scope = EvalScope::EveryEvent;
    ContextRule context_rule = ContextRule::ExcludeTradedAsset;
    unsigned threads = 1;
};

struct TallyTable {
    std::vector<InvestorTallies> by_investor;  // indexed by InvestorIndex

    friend bool operator==(const TallyTable&, const TallyTable&) = default;
};

namespace detail {

inline void run_worker(const Dataset& data, const EngineOptions& opts, unsigned worker,
                       unsigned n_workers, TallyTable& out) {
    MarketTape tape(data.asset_count());
    std::vector<Portfolio> portfolios(data.investor_count());
    auto price_of = [&tape](AssetIndex a) { return tape.last(a); };
    for (const Event& e : data.events()) {
        tape.observe(e);
        if (e.investor % n_workers != worker) continue;
        Portfolio& pf = portfolios[e.investor];
        const auto leg = pf.apply(e);
        const auto open = pf.open_positions();
        const Context ctx = classify_context(open, e.asset, price_of, opts.context_rule);
        const bool paper = opts.eval_scope == EvalScope::EveryEvent || e.side == Side::Sell;
        accrue_event(out.by_investor[e.investor], leg, open, price_of, ctx, paper);
    }
}

}  // namespace detail

inline TallyTable accrue_all(const Dataset& data, const EngineOptions& opts = {}) {
    TallyTable out;
    out.by_investor.resize(data.investor_count());
    const unsigned n = std::max(1u, std::min<unsigned>(opts.threads,
                                                       static_cast<unsigned>(std::max<std::size_t>(
                                                           1, data.investor_count()))));
    if (n == 1) {
        detail::run_worker(data, opts, 0, 1, out);
        return out;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> workers;
        workers.reserve(n);
        for (unsigned w = 0; w < n; ++w) {
            workers.emplace_back([&, w] {
                try {
                    detail::run_worker(data, opts, w, n, out);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace dispo
