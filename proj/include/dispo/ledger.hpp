#pragma once

// Per-investor portfolio state: signed positions carried at average cost.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dispo/dataset.hpp"
#include "dispo/rational.hpp"
#include "dispo/types.hpp"

namespace dispo {

struct Position {
    AssetIndex asset = 0;
    std::int64_t signed_quantity = 0;  // > 0 long holding, < 0 native short
    Rational reference;                // average entry price, in price ticks

    bool is_long() const { return signed_quantity > 0; }
    double reference_price() const {
        return reference.to_double() / static_cast<double>(Price::kScale);
    }

    friend bool operator==(const Position&, const Position&) = default;
};

enum class Direction : std::uint8_t { ClosedLong, ClosedShort };

struct RealizationLeg {
    AssetIndex asset = 0;
    std::int64_t quantity_closed = 0;
    Rational reference;
    Price execution_price;
    Direction direction = Direction::ClosedLong;

    // Profit per unit in price ticks.
    Rational unit_profit() const {
        const Rational diff = Rational(execution_price.ticks()) - reference;
        return direction == Direction::ClosedLong ? diff : -diff;
    }

    friend bool operator==(const RealizationLeg&, const RealizationLeg&) = default;
};

// (market - reference) * signed_quantity, in ticks x units.
inline Rational unrealized_pnl(const Position& p, Price market) {
    return (Rational(market.ticks()) - p.reference) * Rational(p.signed_quantity);
}

inline double to_currency(const Rational& ticks_amount) {
    return ticks_amount.to_double() / static_cast<double>(Price::kScale);
}

class Portfolio {
public:
    // Applies one trade. Increases move the reference to the volume-weighted
    // average; reductions keep it; a trade that crosses zero closes the old
    // side in one leg and opens the remainder at the trade price.
    std::optional<RealizationLeg> apply(AssetIndex asset, Side side, std::int64_t quantity,
                                        Price price) {
        const std::int64_t delta = side == Side::Buy ? quantity : -quantity;
        auto it = find(asset);
        if (it == positions_.end() || it->asset != asset) {
            positions_.insert(it, Position{asset, delta, Rational(price.ticks())});
            return std::nullopt;
        }

        Position& pos = *it;
        const std::int64_t held = pos.signed_quantity;
        if ((held > 0) == (delta > 0)) {
            pos.reference = blend(pos.reference, std::abs(held), price, quantity);
            pos.signed_quantity = held + delta;
            return std::nullopt;
        }

        const std::int64_t closed = std::min(std::abs(held), quantity);
        RealizationLeg leg{asset, closed, pos.reference, price,
                           held > 0 ? Direction::ClosedLong : Direction::ClosedShort};
        const std::int64_t remaining = held + delta;
        if (remaining == 0) {
            positions_.erase(it);
        } else if ((remaining > 0) == (held > 0)) {
            pos.signed_quantity = remaining;
        } else {
            pos.signed_quantity = remaining;
            pos.reference = Rational(price.ticks());
        }
        return leg;
    }

    std::optional<RealizationLeg> apply(const Event& e) {
        return apply(e.asset, e.side, e.quantity, e.price);
    }

    // Open positions ordered by asset index.
    std::span<const Position> open_positions() const { return positions_; }

    const Position* position(AssetIndex asset) const {
        auto it = std::lower_bound(positions_.begin(), positions_.end(), asset,
                                   [](const Position& p, AssetIndex a) { return p.asset < a; });
        return it != positions_.end() && it->asset == asset ? &*it : nullptr;
    }

    bool empty() const { return positions_.empty(); }

private:
    std::vector<Position>::iterator find(AssetIndex asset) {
        return std::lower_bound(positions_.begin(), positions_.end(), asset,
                                [](const Position& p, AssetIndex a) { return p.asset < a; });
    }

    static Rational blend(const Rational& ref, std::int64_t held, Price price, std::int64_t qty) {
        try {
            return (ref * Rational(held) + Rational(price.ticks()) * Rational(qty)) /
                   Rational(held + qty);
        } catch (const ArithmeticOverflow&) {
            // Denominators only grow across add-after-partial-close cycles;
            // past 128 bits fall back to 2^-20 tick resolution.
            constexpr long double kGrid = 1048576.0L;
            const long double avg =
                (ref.to_long_double() * held + static_cast<long double>(price.ticks()) * qty) /
                static_cast<long double>(held + qty);
            return Rational(static_cast<int128>(std::llroundl(avg * kGrid)),
                            static_cast<int128>(1) << 20);
        }
    }

    std::vector<Position> positions_;
};

}  // namespace dispo
