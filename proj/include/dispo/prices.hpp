#pragma once

// Market price series pooled from every client's trades, with
// last-observation-carried-forward lookup.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dispo/dataset.hpp"
#include "dispo/types.hpp"

namespace dispo {

struct PriceObservation {
    Timestamp timestamp;
    std::uint64_t seq = 0;
    Price price;
};

struct PriceSeries {
    std::string asset_id;
    std::vector<PriceObservation> observations;  // ordered by (timestamp, seq)
};

using PriceSeriesMap = std::map<std::string, PriceSeries, std::less<>>;

// One observation per transaction. `txs` must be ordered by (timestamp, seq).
inline PriceSeriesMap build_series(std::span<const Transaction> txs) {
    PriceSeriesMap out;
    for (const auto& tx : txs) {
        auto it = out.find(tx.asset_id);
        if (it == out.end()) it = out.emplace(tx.asset_id, PriceSeries{tx.asset_id, {}}).first;
        it->second.observations.push_back({tx.timestamp, tx.seq, tx.price});
    }
    return out;
}

// Price of the latest observation with (timestamp, seq) <= (t, s).
inline std::optional<Price> price_at(const PriceSeries& series, Timestamp t, std::uint64_t s) {
    const auto& obs = series.observations;
    auto it = std::upper_bound(obs.begin(), obs.end(), std::pair{t, s},
                               [](const std::pair<Timestamp, std::uint64_t>& key,
                                  const PriceObservation& o) {
                                   return key.first != o.timestamp ? key.first < o.timestamp
                                                                   : key.second < o.seq;
                               });
    if (it == obs.begin()) return std::nullopt;
    return std::prev(it)->price;
}

inline void write_series(std::ostream& out, const PriceSeriesMap& series) {
    out << "asset_id,timestamp,price\n";
    for (const auto& [id, s] : series) {
        for (const auto& o : s.observations) {
            out << id << ',' << format_timestamp(o.timestamp) << ',' << format_price(o.price) << '\n';
        }
    }
}

// Rolling "last traded price" per asset, advanced in event order. When the
// tape has observed every event up to and including e, last(a) equals
// price_at(series[a], e.timestamp, e.seq): O(1) per lookup for chronological
// consumers.
class MarketTape {
public:
    explicit MarketTape(std::size_t n_assets) : last_(n_assets), seen_(n_assets, false) {}

    void observe(const Event& e) {
        last_[e.asset] = e.price;
        seen_[e.asset] = true;
    }

    std::optional<Price> last(AssetIndex a) const {
        if (!seen_[a]) return std::nullopt;
        return last_[a];
    }

private:
    std::vector<Price> last_;
    std::vector<bool> seen_;
};

}  // namespace dispo
