#pragma once

// Synthetic investor populations with known realization propensities.
//
// Market: one index whose cumulative return follows a reflected random walk
// bounded so that every instrument keeps a positive price. Instrument a
// trades at initial_a * (1 + leverage_a * R_k) at step k, rounded to cents.
//
// Investors act once per step. At each step every open position is sold
// outright with probability p_realize_gain when it stands at a gain and
// p_realize_loss when it stands at a loss; then the investor either adds to a
// held asset or opens a new one. Step 0 is a single opening buy.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dispo/error.hpp"
#include "dispo/ingest.hpp"
#include "dispo/ledger.hpp"
#include "dispo/metrics.hpp"
#include "dispo/types.hpp"

namespace dispo::synth {

// SplitMix64, used for seeding.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// xoshiro256** 1.0 (Blackman and Vigna). Distributions are implemented here
// rather than taken from <random> so output is identical on every platform.
class Xoshiro256 {
public:
    Xoshiro256(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t sm = seed;
        const std::uint64_t salt = splitmix64(sm) ^ (stream * 0xD1B54A32D192ED03ULL);
        sm = salt;
        for (auto& w : s_) w = splitmix64(sm);
    }

    static Xoshiro256 from_state(std::uint64_t s0, std::uint64_t s1, std::uint64_t s2, std::uint64_t s3) {
        Xoshiro256 r(0, 0);
        r.s_[0] = s0;
        r.s_[1] = s1;
        r.s_[2] = s2;
        r.s_[3] = s3;
        return r;
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), unbiased.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % n;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

struct BehaviorProfile {
    double p_realize_gain = 0.5;
    double p_realize_loss = 0.5;
    std::size_t n_assets = 8;
    std::vector<double> leverage_menu = {1, 2, 3, 7, -1, -2, -3, -7};
    std::size_t horizon_events = 100;
    std::uint64_t seed = 42;

    double index_step = 0.004;       // max absolute index move per step
    double p_add = 0.2;              // chance a buy adds to a held asset
    std::int64_t max_quantity = 100;
    Timestamp start = *parse_timestamp("2010-01-04T09:00:00");
    std::int64_t step_seconds = 86400;  // one step per day

    void validate() const {
        auto bad = [](const std::string& why) { throw Error(ErrorKind::InvalidProfile, why); };
        auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
        if (!prob(p_realize_gain) || !prob(p_realize_loss) || !prob(p_add)) {
            bad("probabilities must lie in [0, 1]");
        }
        if (horizon_events < 1) bad("horizon_events must be at least 1");
        if (n_assets < 1) bad("n_assets must be at least 1");
        if (leverage_menu.empty()) bad("leverage menu is empty");
        for (double l : leverage_menu) {
            if (l == 0 || !std::isfinite(l)) bad("leverage must be finite and non-zero");
        }
        if (!(index_step > 0) || index_step > 0.05) bad("index_step must be in (0, 0.05]");
        if (max_quantity < 1) bad("max_quantity must be at least 1");
        if (step_seconds < 1) bad("step_seconds must be at least 1");
    }
};

struct Population {
    std::vector<Transaction> transactions;  // chronological, seq = position
    InstrumentRegistry registry;
};

inline std::string investor_name(std::size_t i) {
    std::string digits = std::to_string(i);
    return "I" + std::string(digits.size() < 5 ? 5 - digits.size() : 0, '0') + digits;
}

// "7L" for +7, "1S" for -1.
inline std::string leverage_suffix(double leverage) {
    return format_double(std::abs(leverage)) + (leverage > 0 ? "L" : "S");
}

inline std::string asset_name(std::size_t a, double leverage) {
    std::string digits = std::to_string(a);
    return "E" + std::string(digits.size() < 2 ? 2 - digits.size() : 0, '0') + digits + "_" +
           leverage_suffix(leverage);
}

namespace detail {

struct Market {
    std::vector<std::vector<Price>> prices;  // [step][asset]
};

inline Market simulate_market(const BehaviorProfile& p, const std::vector<double>& leverage,
                              std::size_t steps) {
    Xoshiro256 rng(p.seed, 0);
    double max_lev = 0;
    for (double l : leverage) max_lev = std::max(max_lev, std::abs(l));
    const double bound = 0.9 / max_lev;

    std::vector<double> initial(leverage.size());
    for (auto& v : initial) v = 5.0 + std::floor(rng.uniform() * 1000.0) / 100.0;

    Market m;
    m.prices.resize(steps);
    double level = 0;
    for (std::size_t k = 0; k < steps; ++k) {
        if (k > 0) {
            level += (2.0 * rng.uniform() - 1.0) * p.index_step;
            if (level > bound) level = 2 * bound - level;
            if (level < -bound) level = -2 * bound - level;
        }
        auto& row = m.prices[k];
        row.resize(leverage.size());
        for (std::size_t a = 0; a < leverage.size(); ++a) {
            const double raw = initial[a] * (1.0 + leverage[a] * level);
            const double cents = std::max(1.0, std::round(raw * 100.0));
            row[a] = Price::from_ticks(static_cast<std::int64_t>(cents) * (Price::kScale / 100));
        }
    }
    return m;
}

struct Order {
    std::uint32_t asset;
    Side side;
    std::int64_t quantity;
};

}  // namespace detail

inline Population generate_population(std::size_t n_investors, const BehaviorProfile& profile) {
    profile.validate();
    const std::size_t n_assets = profile.n_assets;
    std::vector<double> leverage(n_assets);
    for (std::size_t a = 0; a < n_assets; ++a) {
        leverage[a] = profile.leverage_menu[a % profile.leverage_menu.size()];
    }
    const std::size_t steps = profile.horizon_events;
    const auto market = detail::simulate_market(profile, leverage, steps);

    Population pop;
    std::vector<std::string> asset_ids(n_assets);
    for (std::size_t a = 0; a < n_assets; ++a) {
        asset_ids[a] = asset_name(a, leverage[a]);
        pop.registry.emplace(asset_ids[a], Instrument{asset_ids[a], "IDX", leverage[a]});
    }

    // orders[investor][step]
    std::vector<std::vector<std::vector<detail::Order>>> orders(n_investors);
    for (std::size_t i = 0; i < n_investors; ++i) {
        Xoshiro256 rng(profile.seed, i + 1);
        Portfolio book;
        auto& mine = orders[i];
        mine.resize(steps);
        for (std::size_t k = 0; k < steps; ++k) {
            const auto& px = market.prices[k];
            std::vector<detail::Order> step_orders;
            std::vector<Position> open(book.open_positions().begin(), book.open_positions().end());
            for (const Position& pos : open) {
                const double u = rng.uniform();
                const int s = evaluate_return(pos.reference, px[pos.asset], true).sign;
                const double p = s > 0 ? profile.p_realize_gain : (s < 0 ? profile.p_realize_loss : 0.0);
                if (u < p) step_orders.push_back({pos.asset, Side::Sell, pos.signed_quantity});
            }
            for (const auto& o : step_orders) book.apply(o.asset, o.side, o.quantity, px[o.asset]);

            const auto held = book.open_positions();
            std::vector<std::uint32_t> candidates;
            const bool add = !held.empty() && rng.uniform() < profile.p_add;
            if (add) {
                for (const auto& pos : held) candidates.push_back(pos.asset);
            } else {
                for (std::uint32_t a = 0; a < n_assets; ++a) {
                    if (!book.position(a)) candidates.push_back(a);
                }
            }
            if (!candidates.empty()) {
                const auto a = candidates[rng.below(candidates.size())];
                const auto q = static_cast<std::int64_t>(
                    1 + rng.below(static_cast<std::uint64_t>(profile.max_quantity)));
                step_orders.push_back({a, Side::Buy, q});
                book.apply(a, Side::Buy, q, px[a]);
            }
            mine[k] = std::move(step_orders);
        }
    }

    for (std::size_t k = 0; k < steps; ++k) {
        const Timestamp ts{profile.start.ns + static_cast<std::int64_t>(k) * profile.step_seconds *
                                                  Timestamp::kNsPerSecond};
        for (std::size_t i = 0; i < n_investors; ++i) {
            for (const auto& o : orders[i][k]) {
                Transaction tx;
                tx.investor_id = investor_name(i);
                tx.asset_id = asset_ids[o.asset];
                tx.side = o.side;
                tx.quantity = o.quantity;
                tx.price = market.prices[k][o.asset];
                tx.timestamp = ts;
                tx.seq = pop.transactions.size();
                pop.transactions.push_back(std::move(tx));
            }
        }
    }
    return pop;
}

}  // namespace dispo::synth
