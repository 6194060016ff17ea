#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace dispo;
using dispo::testing::random_stream;

namespace {

Tally gains_first(double rg, double pg, double rl, double pl) { return Tally{rg, rl, pg, pl}; }

// One investor, two assets, Count tallies placed in the given contexts.
TallyTable two_asset_table(Context c0, const Tally& t0, Context c1, const Tally& t1) {
    TallyTable table;
    table.by_investor.resize(1);
    table.by_investor[0].at(0, c0)[0] = t0;
    table.by_investor[0].at(1, c1)[0] = t1;
    return table;
}

const std::vector<std::string> kInv = {"c"};
const std::vector<std::string> kAssets = {"A", "B"};

}  // namespace

TEST(Aggregate, PooledSumsComponentsBeforeRatio) {
    const auto table = two_asset_table(Context::Positive, gains_first(1, 1, 0, 1), Context::Positive,
                                       gains_first(1, 3, 2, 2));
    const auto rec = aggregate(table, kInv, kAssets, Level::InvestorPooled, Framing::Narrow, Method::Count);
    ASSERT_EQ(rec.size(), 1u);
    EXPECT_EQ(rec[0].asset_id, "*");
    EXPECT_EQ(rec[0].context, Context::All);
    // pooled (rg, pg, rl, pl) = (2, 4, 2, 3)
    EXPECT_TRUE(rec[0].defined);
    EXPECT_DOUBLE_EQ(rec[0].de, 2.0 / 6.0 - 2.0 / 5.0);
}

TEST(Aggregate, MeanOfAssets) {
    const auto table = two_asset_table(Context::Positive, gains_first(1, 1, 0, 1), Context::Negative,
                                       gains_first(1, 3, 2, 2));
    const auto rec =
        aggregate(table, kInv, kAssets, Level::InvestorMeanOfAssets, Framing::Narrow, Method::Count);
    ASSERT_EQ(rec.size(), 1u);
    EXPECT_DOUBLE_EQ(rec[0].de, (0.5 + -0.25) / 2.0);
}

TEST(Aggregate, PerAssetIntegratedSplitsContexts) {
    const auto table = two_asset_table(Context::Positive, gains_first(1, 1, 0, 1), Context::Negative,
                                       gains_first(1, 3, 2, 2));
    const auto rec = aggregate(table, kInv, kAssets, Level::PerAsset, Framing::Integrated, Method::Count);
    ASSERT_EQ(rec.size(), 2u);
    EXPECT_EQ(rec[0], (DeRecord{"c", "A", Context::Positive, Method::Count, 0.5, true}));
    EXPECT_EQ(rec[1], (DeRecord{"c", "B", Context::Negative, Method::Count, -0.25, true}));
}

TEST(Aggregate, WideIsPooledPerContext) {
    const auto table = two_asset_table(Context::Positive, gains_first(1, 1, 0, 1), Context::Negative,
                                       gains_first(1, 3, 2, 2));
    const auto rec = aggregate(table, kInv, kAssets, Level::InvestorPooled, Framing::Wide, Method::Count);
    ASSERT_EQ(rec.size(), 2u);
    EXPECT_EQ(rec[0].context, Context::Positive);
    EXPECT_EQ(rec[0].de, 0.5);
    EXPECT_EQ(rec[1].context, Context::Negative);
    EXPECT_EQ(rec[1].de, -0.25);
}

TEST(Aggregate, NeutralOnlyInNarrow) {
    TallyTable table;
    table.by_investor.resize(1);
    table.by_investor[0].at(0, Context::Neutral)[0] = gains_first(1, 1, 1, 3);
    EXPECT_TRUE(aggregate(table, kInv, kAssets, Level::PerAsset, Framing::Integrated, Method::Count).empty());
    EXPECT_TRUE(aggregate(table, kInv, kAssets, Level::InvestorPooled, Framing::Wide, Method::Count).empty());
    const auto narrow = aggregate(table, kInv, kAssets, Level::PerAsset, Framing::Narrow, Method::Count);
    ASSERT_EQ(narrow.size(), 1u);
    EXPECT_EQ(narrow[0].de, 0.25);
}

TEST(Aggregate, SingleAssetSingleContextFramingsCoincide) {
    TallyTable table;
    table.by_investor.resize(1);
    table.by_investor[0].at(0, Context::Negative)[0] = gains_first(3, 1, 1, 3);
    const auto n = aggregate(table, kInv, kAssets, Level::PerAsset, Framing::Narrow, Method::Count);
    const auto w = aggregate(table, kInv, kAssets, Level::InvestorPooled, Framing::Wide, Method::Count);
    const auto i = aggregate(table, kInv, kAssets, Level::PerAsset, Framing::Integrated, Method::Count);
    ASSERT_EQ(n.size(), 1u);
    ASSERT_EQ(w.size(), 1u);
    ASSERT_EQ(i.size(), 1u);
    EXPECT_EQ(n[0].de, 0.5);
    EXPECT_EQ(w[0].de, n[0].de);
    EXPECT_EQ(i[0].de, n[0].de);
}

TEST(Aggregate, UndefinedRecordsAreFlagged) {
    TallyTable table;
    table.by_investor.resize(1);
    table.by_investor[0].at(0, Context::Positive)[0] = gains_first(1, 0, 0, 0);
    const auto rec = aggregate(table, kInv, kAssets, Level::PerAsset, Framing::Narrow, Method::Count);
    ASSERT_EQ(rec.size(), 1u);
    EXPECT_FALSE(rec[0].defined);
    const auto zero = aggregate(table, kInv, kAssets, Level::PerAsset, Framing::Narrow, Method::Count,
                                {ZeroDenominator::Zero, ValueAggregation::Sum});
    EXPECT_TRUE(zero[0].defined);
    EXPECT_EQ(zero[0].de, 1.0);
    std::ostringstream os;
    write_records(os, rec);
    EXPECT_EQ(os.str(), "investor_id,asset_id,context,method,de,defined\nc,A,All,Count,NA,false\n");
}

TEST(Aggregate, NarrowIsSumOfContextPartitions) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const Dataset d(random_stream(seed));
        const auto table = accrue_all(d);
        for (std::size_t inv = 0; inv < table.by_investor.size(); ++inv) {
            for (const auto& [asset, ct] : table.by_investor[inv].rows()) {
                for (Method m : kAllMethods) {
                    const auto mi = static_cast<std::size_t>(m);
                    Tally sum;
                    for (Context c : kAccrualContexts) sum += ct[static_cast<std::size_t>(c)][mi];
                    // The narrow record is computed from exactly this sum.
                    const auto rec = aggregate(table, d, Level::PerAsset, Framing::Narrow, m);
                    const auto it = std::find_if(rec.begin(), rec.end(), [&](const DeRecord& r) {
                        return r.investor_id == d.investor_id(static_cast<InvestorIndex>(inv)) &&
                               r.asset_id == d.asset_id(asset);
                    });
                    if (sum.empty()) {
                        EXPECT_EQ(it, rec.end());
                        continue;
                    }
                    ASSERT_NE(it, rec.end());
                    const auto v = compute_de(sum);
                    EXPECT_EQ(it->defined, v.defined);
                    if (v.defined) EXPECT_EQ(it->de, v.de);
                }
            }
        }
    }
}

TEST(Aggregate, RecordsSortedByInvestorAssetContext) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Dataset d(random_stream(seed, {5, 6, 80, 5}));
        const auto table = accrue_all(d);
        const auto rec = aggregate(table, d, Level::PerAsset, Framing::Integrated, Method::Total);
        for (std::size_t i = 1; i < rec.size(); ++i) {
            const auto key = [](const DeRecord& r) { return std::tuple(r.investor_id, r.asset_id, r.context); };
            EXPECT_LT(key(rec[i - 1]), key(rec[i]));
        }
    }
}

TEST(Aggregate, DefinedValuesBoundedUnderAllOptions) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Dataset d(random_stream(seed));
        const auto table = accrue_all(d);
        for (Framing f : {Framing::Narrow, Framing::Wide, Framing::Integrated}) {
            for (Level l : {Level::PerAsset, Level::InvestorPooled, Level::InvestorMeanOfAssets}) {
                for (Method m : kAllMethods) {
                    for (auto zd : {ZeroDenominator::Exclude, ZeroDenominator::Zero}) {
                        for (auto va : {ValueAggregation::Sum, ValueAggregation::Mean}) {
                            for (const auto& r : aggregate(table, d, l, f, m, {zd, va})) {
                                if (!r.defined) continue;
                                EXPECT_GE(r.de, -1.0);
                                EXPECT_LE(r.de, 1.0);
                            }
                        }
                    }
                }
            }
        }
    }
}

TEST(Histogram, Examples) {
    const std::vector<double> v = {0.5, 0.5, -0.2};
    const auto bins = histogram(std::span<const double>(v), 0.5);
    ASSERT_EQ(bins.size(), 4u);
    EXPECT_EQ(bins[0], (HistogramBin{-1.0, 0}));
    EXPECT_EQ(bins[1], (HistogramBin{-0.5, 1}));
    EXPECT_EQ(bins[2], (HistogramBin{0.0, 0}));
    EXPECT_EQ(bins[3], (HistogramBin{0.5, 2}));

    const auto empty = histogram(std::span<const double>(), 0.5);
    ASSERT_EQ(empty.size(), 4u);
    for (const auto& b : empty) EXPECT_EQ(b.count, 0u);

    const std::vector<double> top = {1.0};
    EXPECT_EQ(histogram(std::span<const double>(top), 0.5)[3].count, 1u);
}

TEST(Histogram, DecimalWidthHasDecimalEdges) {
    const std::vector<double> v = {-1.0, -0.3, 0.3, 0.7, 0.1, 1.0};
    const auto bins = histogram(std::span<const double>(v), 0.1);
    ASSERT_EQ(bins.size(), 20u);
    EXPECT_EQ(bins[7].lower, -0.3);
    EXPECT_EQ(bins[13].lower, 0.3);
    EXPECT_EQ(bins[0].count, 1u);
    EXPECT_EQ(bins[7].count, 1u);   // -0.3
    EXPECT_EQ(bins[13].count, 1u);  // 0.3
    EXPECT_EQ(bins[17].count, 1u);  // 0.7
    EXPECT_EQ(bins[11].count, 1u);  // 0.1
    EXPECT_EQ(bins[19].count, 1u);  // 1.0
    std::ostringstream os;
    write_histogram(os, bins);
    EXPECT_EQ(os.str().substr(0, 30), "bin_edge,count\n-1,1\n-0.9,0\n-0.");
}

TEST(Histogram, ConservesCount) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    for (double w : {0.05, 0.1, 0.3, 0.7, 2.0}) {
        std::vector<double> v(1000);
        for (auto& x : v) x = u(rng);
        v.push_back(1.0);
        v.push_back(-1.0);
        std::size_t total = 0;
        for (const auto& b : histogram(std::span<const double>(v), w)) total += b.count;
        EXPECT_EQ(total, v.size());
    }
}

TEST(Histogram, InvalidWidth) {
    for (double w : {0.0, -0.1, 2.5, std::nan("")}) {
        EXPECT_EQ(dispo::testing::kind_of([&] { histogram(std::span<const double>(), w); }),
                  ErrorKind::InvalidBinWidth);
    }
}
