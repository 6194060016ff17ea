#include <gtest/gtest.h>

#include <bit>
#include <numeric>
#include <random>

#include "support.hpp"

using namespace dispo;

namespace {

// Counts of U over all C(n1 + n2, n1) placements of the first sample's ranks.
std::vector<std::uint64_t> enumerate_u(unsigned n1, unsigned n2) {
    const unsigned n = n1 + n2;
    std::vector<std::uint64_t> counts(n1 * n2 + 1, 0);
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<unsigned>(std::popcount(mask)) != n1) continue;
        unsigned rank_sum = 0;
        for (unsigned r = 0; r < n; ++r) {
            if (mask & (1u << r)) rank_sum += r + 1;
        }
        ++counts[rank_sum - n1 * (n1 + 1) / 2];
    }
    return counts;
}

double reference_p(const std::vector<std::uint64_t>& counts, unsigned u) {
    std::uint64_t lower = 0, upper = 0, total = 0;
    for (unsigned k = 0; k < counts.size(); ++k) {
        total += counts[k];
        if (k <= u) lower += counts[k];
        if (k >= u) upper += counts[k];
    }
    return std::min(1.0, 2.0 * static_cast<double>(std::min(lower, upper)) / static_cast<double>(total));
}

}  // namespace

TEST(MannWhitney, IdenticalSamples) {
    const std::vector<double> x = {1, 2, 3};
    const auto r = mann_whitney(x, x);
    EXPECT_EQ(r.median_diff, 0.0);
    EXPECT_EQ(r.p_value, 1.0);
    EXPECT_EQ(r.mode, PValueMode::NormalApprox);  // ties force the approximation
}

TEST(MannWhitney, SeparatedSamplesExact) {
    const std::vector<double> x = {1, 2, 3, 4}, y = {5, 6, 7, 8};
    const auto r = mann_whitney(x, y);
    EXPECT_EQ(r.u_statistic, 0.0);
    EXPECT_EQ(r.mode, PValueMode::Exact);
    EXPECT_DOUBLE_EQ(r.p_value, 2.0 / 70.0);
    EXPECT_EQ(r.median_diff, -4.0);
    EXPECT_EQ(r.stars, Stars::Two);
}

TEST(MannWhitney, DistributionMatchesEnumeration) {
    for (unsigned n1 = 1; n1 <= 8; ++n1) {
        for (unsigned n2 = 1; n2 <= 8; ++n2) {
            const auto counts = enumerate_u(n1, n2);
            const auto dist = u_distribution(n1, n2);
            ASSERT_EQ(dist.size(), counts.size());
            for (std::size_t k = 0; k < counts.size(); ++k) {
                EXPECT_EQ(dist[k], static_cast<double>(counts[k]));
            }
            for (unsigned u = 0; u <= n1 * n2; ++u) {
                EXPECT_EQ(exact_u_pvalue(n1, n2, u), reference_p(counts, u)) << n1 << "x" << n2 << " u=" << u;
            }
        }
    }
}

TEST(MannWhitney, ArgumentSwap) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    for (int i = 0; i < 200; ++i) {
        std::vector<double> x(1 + rng() % 40), y(1 + rng() % 40);
        for (auto& v : x) v = std::round(g(rng) * 4) / 4;
        for (auto& v : y) v = std::round((g(rng) + 0.3) * 4) / 4;
        const auto a = mann_whitney(x, y);
        const auto b = mann_whitney(y, x);
        EXPECT_EQ(a.median_diff, -b.median_diff);
        EXPECT_NEAR(a.p_value, b.p_value, 1e-12);
        EXPECT_EQ(a.u_statistic + b.u_statistic, static_cast<double>(x.size() * y.size()));
        EXPECT_GE(a.p_value, 0.0);
        EXPECT_LE(a.p_value, 1.0);
    }
}

TEST(MannWhitney, ShiftInvariance) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> x(1 + rng() % 25), y(1 + rng() % 25);
        for (auto& v : x) v = std::round(u(rng) * 8) / 8;
        for (auto& v : y) v = std::round(u(rng) * 8) / 8;
        auto xs = x, ys = y;
        for (auto& v : xs) v += 0.5;  // exact for eighths
        for (auto& v : ys) v += 0.5;
        const auto a = mann_whitney(x, y), b = mann_whitney(xs, ys);
        EXPECT_EQ(a.u_statistic, b.u_statistic);
        EXPECT_EQ(a.p_value, b.p_value);
        EXPECT_EQ(a.stars, b.stars);
        EXPECT_EQ(a.median_diff, b.median_diff);
    }
}

TEST(MannWhitney, NormalApproxNearPermutation) {
    std::mt19937_64 rng(30);
    std::normal_distribution<double> g;
    for (double shift : {0.0, 0.4, 0.8}) {
        std::vector<double> x(30), y(30);
        for (auto& v : x) v = g(rng);
        for (auto& v : y) v = g(rng) + shift;
        const auto r = mann_whitney(x, y);
        ASSERT_EQ(r.mode, PValueMode::NormalApprox);
        // Permutation estimate on ranks 1..60.
        const double mean = 450.0, dev = std::abs(r.u_statistic - mean);
        std::vector<int> ranks(60);
        std::iota(ranks.begin(), ranks.end(), 1);
        int hits = 0;
        const int draws = 20000;
        for (int d = 0; d < draws; ++d) {
            std::shuffle(ranks.begin(), ranks.end(), rng);
            const int s = std::accumulate(ranks.begin(), ranks.begin() + 30, 0);
            if (std::abs(s - 465 - mean) >= dev - 1e-9) ++hits;
        }
        EXPECT_NEAR(r.p_value, static_cast<double>(hits) / draws, 0.02) << "shift " << shift;
    }
}

TEST(MannWhitney, ForcedNormalMode) {
    const std::vector<double> x = {1, 2, 3, 4}, y = {5, 6, 7, 8};
    const auto r = mann_whitney(x, y, ModePolicy::Normal);
    EXPECT_EQ(r.mode, PValueMode::NormalApprox);
    EXPECT_GT(r.p_value, 0.0);
    EXPECT_LT(r.p_value, 0.06);
}

TEST(MannWhitney, EmptySample) {
    const std::vector<double> x = {1};
    EXPECT_EQ(dispo::testing::kind_of([&] { mann_whitney(x, {}); }), ErrorKind::EmptySample);
}

TEST(Stars, ThresholdsAndMonotone) {
    EXPECT_EQ(stars_for(0.0099), Stars::Three);
    EXPECT_EQ(stars_for(0.01), Stars::Two);
    EXPECT_EQ(stars_for(0.0499), Stars::Two);
    EXPECT_EQ(stars_for(0.05), Stars::One);
    EXPECT_EQ(stars_for(0.0999), Stars::One);
    EXPECT_EQ(stars_for(0.1), Stars::None);
    Stars prev = Stars::Three;
    for (int i = 0; i <= 1000; ++i) {
        const Stars s = stars_for(i / 1000.0);
        EXPECT_LE(static_cast<int>(s), static_cast<int>(prev));
        prev = s;
    }
}

TEST(FormatCell, Conventions) {
    TestResult r;
    r.median_diff = -0.175;
    r.p_value = 0.004;
    r.stars = stars_for(r.p_value);
    EXPECT_EQ(format_cell(r), "-0.175***");
    r.median_diff = -0.021;
    r.p_value = 0.35;
    r.stars = stars_for(r.p_value);
    EXPECT_EQ(format_cell(r), "-0.021");
    r.median_diff = 0.0;
    r.p_value = 1.0;
    r.stars = stars_for(r.p_value);
    EXPECT_EQ(format_cell(r), "0.000");
    r.median_diff = -0.0001;
    EXPECT_EQ(format_cell(r), "0.000");
    r.median_diff = 0.25;
    r.stars = Stars::One;
    EXPECT_EQ(format_cell(r, 2), "0.25*");
}
