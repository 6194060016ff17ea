#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dispo/dispo.hpp"
#include "dispo/oracle.hpp"

namespace dispo::testing {

// Kind of the dispo::Error thrown by fn, if any.
inline std::optional<ErrorKind> kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

inline Timestamp at_seconds(std::int64_t s) {
    static const Timestamp base = *parse_timestamp("2020-03-02T09:00:00");
    return Timestamp{base.ns + s * Timestamp::kNsPerSecond};
}

inline Transaction tx(std::string investor, std::string asset, Side side, std::int64_t qty, double price,
                      std::int64_t second = 0) {
    Transaction t;
    t.investor_id = std::move(investor);
    t.asset_id = std::move(asset);
    t.side = side;
    t.quantity = qty;
    t.price = Price::from_double(price);
    t.timestamp = at_seconds(second);
    return t;
}

// Assigns seq in list order and sorts by (timestamp, seq), as ingest would.
inline std::vector<Transaction> sequenced(std::vector<Transaction> txs) {
    for (std::size_t i = 0; i < txs.size(); ++i) txs[i].seq = i;
    std::stable_sort(txs.begin(), txs.end(),
                     [](const Transaction& a, const Transaction& b) { return a.timestamp < b.timestamp; });
    return txs;
}

struct StreamShape {
    int max_investors = 3;
    int max_assets = 4;
    int max_events = 50;
    std::int64_t max_quantity = 5;
};

// Small random multi-investor stream. Prices sit on a coarse cent grid so
// zero returns, flips and exact-zero contexts all occur regularly.
inline std::vector<Transaction> random_stream(std::uint64_t seed, const StreamShape& shape = {}) {
    std::mt19937_64 rng(seed);
    auto pick = [&](std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
    };
    const int investors = static_cast<int>(pick(1, shape.max_investors));
    const int assets = static_cast<int>(pick(1, shape.max_assets));
    const int events = static_cast<int>(pick(1, shape.max_events));
    std::vector<std::int64_t> cents(assets);
    for (auto& c : cents) c = pick(500, 1500);
    std::vector<Transaction> out;
    std::int64_t clock = 0;
    for (int e = 0; e < events; ++e) {
        const int a = static_cast<int>(pick(0, assets - 1));
        if (pick(0, 2) > 0) cents[a] = std::max<std::int64_t>(1, cents[a] + pick(-60, 60));
        clock += pick(0, 2);  // repeated timestamps exercise the seq tie-break
        Transaction t;
        t.investor_id = "inv" + std::to_string(pick(0, investors - 1));
        t.asset_id = "A" + std::to_string(a);
        t.side = pick(0, 1) ? Side::Buy : Side::Sell;
        t.quantity = pick(1, shape.max_quantity);
        t.price = Price::from_ticks(cents[a] * (Price::kScale / 100));
        t.timestamp = at_seconds(clock);
        out.push_back(std::move(t));
    }
    return sequenced(std::move(out));
}

inline std::vector<Transaction> scaled(std::vector<Transaction> txs, std::int64_t num, std::int64_t den) {
    for (auto& t : txs) t.price = Price::from_ticks(t.price.ticks() * num / den);
    return txs;
}

inline std::vector<Transaction> side_swapped(std::vector<Transaction> txs) {
    for (auto& t : txs) t.side = opposite(t.side);
    return txs;
}

inline TallyTable run_engine(const Dataset& d, EngineOptions opts = {}) { return accrue_all(d, opts); }

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = std::filesystem::temp_directory_path() /
                ("dispo_" + tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace dispo::testing
