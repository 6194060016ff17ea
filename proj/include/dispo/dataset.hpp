#pragma once

// Interned, chronologically ordered view of a transaction log. Investor and
// asset identifiers are mapped to dense indices assigned in lexicographic
// order, so index order equals identifier order.

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dispo/types.hpp"

namespace dispo {

using InvestorIndex = std::uint32_t;
using AssetIndex = std::uint32_t;

struct Event {
    InvestorIndex investor = 0;
    AssetIndex asset = 0;
    Side side = Side::Buy;
    std::int64_t quantity = 0;
    Price price;
    Timestamp timestamp;
    std::uint64_t seq = 0;
};

class Dataset {
public:
    Dataset() = default;

    // `txs` must already be ordered by (timestamp, seq).
    explicit Dataset(std::span<const Transaction> txs) {
        investors_ = collect_ids(txs, &Transaction::investor_id);
        assets_ = collect_ids(txs, &Transaction::asset_id);
        std::unordered_map<std::string_view, std::uint32_t> inv_index, asset_index;
        inv_index.reserve(investors_.size());
        asset_index.reserve(assets_.size());
        for (std::uint32_t i = 0; i < investors_.size(); ++i) inv_index.emplace(investors_[i], i);
        for (std::uint32_t i = 0; i < assets_.size(); ++i) asset_index.emplace(assets_[i], i);
        events_.reserve(txs.size());
        for (const auto& tx : txs) {
            events_.push_back(Event{inv_index.at(tx.investor_id), asset_index.at(tx.asset_id), tx.side,
                                    tx.quantity, tx.price, tx.timestamp, tx.seq});
        }
    }

    std::span<const Event> events() const { return events_; }
    const std::vector<std::string>& investor_ids() const { return investors_; }
    const std::vector<std::string>& asset_ids() const { return assets_; }
    std::size_t investor_count() const { return investors_.size(); }
    std::size_t asset_count() const { return assets_.size(); }
    const std::string& investor_id(InvestorIndex i) const { return investors_[i]; }
    const std::string& asset_id(AssetIndex a) const { return assets_[a]; }

private:
    static std::vector<std::string> collect_ids(std::span<const Transaction> txs,
                                                std::string Transaction::*field) {
        std::vector<std::string_view> views;
        views.reserve(txs.size());
        for (const auto& tx : txs) views.emplace_back(tx.*field);
        std::sort(views.begin(), views.end());
        views.erase(std::unique(views.begin(), views.end()), views.end());
        return {views.begin(), views.end()};
    }

    std::vector<std::string> investors_;
    std::vector<std::string> assets_;
    std::vector<Event> events_;
};

}  // namespace dispo
