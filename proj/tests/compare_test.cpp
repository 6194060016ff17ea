#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace dispo;

namespace {

InstrumentRegistry registry() {
    return parse_instruments(std::string_view(
        "asset_id,underlying_id,leverage\n"
        "L1,IDX,1\nL2,IDX,2\nL7,IDX,7\nS1,IDX,-1\nS7,IDX,-7\nS3,IDX,-3\nOTHER,DAX,2\n"));
}

DeRecord rec(const std::string& asset, Context ctx, double de, bool defined = true) {
    return DeRecord{"inv", asset, ctx, Method::Count, de, defined};
}

TestResult fixed(double diff, double p) {
    TestResult r;
    r.median_diff = diff;
    r.p_value = p;
    r.stars = stars_for(p);
    return r;
}

}  // namespace

TEST(Labels, LeverageRows) {
    EXPECT_EQ(row_label(1, 2), "1x = 2x");
    EXPECT_EQ(row_label(-1, -7), "-1x = -7x");
    EXPECT_EQ(row_label(-1, 1), "-1x = 1x");
    EXPECT_EQ(leverage_label(0.5), "0.5x");
}

TEST(Filters, ParseAndMatch) {
    const auto reg = registry();
    const auto f = parse_filter("lev=-7x, ctx=negative");
    EXPECT_EQ(f.leverage, -7.0);
    EXPECT_EQ(f.context, Context::Negative);
    EXPECT_TRUE(f.matches(rec("S7", Context::Negative, 0.1), reg));
    EXPECT_FALSE(f.matches(rec("S7", Context::Positive, 0.1), reg));
    EXPECT_FALSE(f.matches(rec("S7", Context::Negative, 0.1, false), reg));
    EXPECT_FALSE(f.matches(rec("unknown", Context::Negative, 0.1), reg));

    const auto longs = parse_filter("exposure=long,underlying=IDX");
    EXPECT_TRUE(longs.matches(rec("L7", Context::All, 0), reg));
    EXPECT_FALSE(longs.matches(rec("OTHER", Context::All, 0), reg));
    EXPECT_FALSE(longs.matches(rec("S1", Context::All, 0), reg));
    EXPECT_EQ(longs.describe(), "exposure=long,underlying=IDX");
    EXPECT_EQ(parse_filter("").describe(), "all");

    EXPECT_EQ(dispo::testing::kind_of([] { parse_filter("lev"); }), ErrorKind::SchemaError);
    EXPECT_EQ(dispo::testing::kind_of([] { parse_filter("colour=red"); }), ErrorKind::SchemaError);
}

TEST(CompareGroups, MedianDifferenceSign) {
    const auto reg = registry();
    const std::vector<DeRecord> records = {rec("L1", Context::All, 0.2), rec("L1", Context::All, 0.3),
                                           rec("L1", Context::All, 0.4), rec("L2", Context::All, 0.45),
                                           rec("L2", Context::All, 0.5), rec("L2", Context::All, 0.4)};
    const auto r = compare_groups(records, parse_filter("lev=1"), parse_filter("lev=2"), reg);
    EXPECT_DOUBLE_EQ(r.median_first, 0.3);
    EXPECT_DOUBLE_EQ(r.median_second, 0.45);
    EXPECT_DOUBLE_EQ(r.median_diff, -0.15);
    EXPECT_EQ(r.n_first, 3u);
}

TEST(CompareGroups, EmptyGroupNamesFilter) {
    const auto reg = registry();
    const std::vector<DeRecord> records = {rec("L1", Context::All, 0.2)};
    try {
        compare_groups(records, parse_filter("lev=1"), parse_filter("lev=-3,ctx=positive"), reg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EmptyGroup);
        EXPECT_EQ(e.detail(), "lev=-3,ctx=positive");
    }
}

TEST(RenderTable, GoldenLayout) {
    ComparisonTable t;
    t.caption = "Variations in disposition effect due to volatility: Short case";
    t.sections.push_back({"Negative Portfolio", "Short ETF",
                          {{"-1x = -2x", {fixed(-0.175, 0.004), fixed(-0.021, 0.35), fixed(0.0, 1.0)}},
                           {"-1x = -7x", {fixed(0.062, 0.03), std::nullopt, fixed(1.25, 0.07)}}}});
    t.sections.push_back({"Positive Portfolio", "Short ETF", {{"-2x = -7x", {fixed(-0.0004, 0.5), fixed(0.1, 0.0), fixed(-0.5, 0.099)}}}});
    const std::string expected =
        "Variations in disposition effect due to volatility: Short case\n"
        "=================================================\n"
        "               Negative Portfolio\n"
        "-------------------------------------------------\n"
        "Short ETF     Count       Total       Value\n"
        "-------------------------------------------------\n"
        "-1x = -2x    -0.175***   -0.021       0.000\n"
        "-1x = -7x     0.062**       n/a       1.250*\n"
        "=================================================\n"
        "               Positive Portfolio\n"
        "-------------------------------------------------\n"
        "Short ETF     Count       Total       Value\n"
        "-------------------------------------------------\n"
        "-2x = -7x     0.000       0.100***   -0.500*\n"
        "=================================================\n"
        "* p<0.1, ** p<0.05, *** p<0.01\n";
    EXPECT_EQ(render_table(t), expected);
}

TEST(RenderTable, CsvCells) {
    ComparisonTable t;
    t.sections.push_back({"", "ETF", {{"-1x = 1x", {fixed(-0.175, 0.004), std::nullopt, std::nullopt}}}});
    std::ostringstream os;
    write_table_csv(os, t);
    const std::string csv = os.str();
    EXPECT_NE(csv.find("ETF,-1x = 1x,Count,"), std::string::npos);
    EXPECT_NE(csv.find(",***,normal,-0.175***\n"), std::string::npos);
    EXPECT_NE(csv.find("ETF,-1x = 1x,Total,,,,,,,,,,n/a\n"), std::string::npos);
}

TEST(Presets, RowLayouts) {
    const auto reg = registry();
    // Every leverage in every context, enough values for each group.
    std::vector<DeRecord> per_asset;
    std::mt19937_64 rng(4);
    for (const auto& [id, inst] : reg) {
        for (Context c : {Context::Positive, Context::Negative, Context::All}) {
            for (int k = 0; k < 6; ++k) per_asset.push_back(rec(id, c, (static_cast<int>(rng() % 200) - 100) / 100.0));
        }
    }
    const RecordSource source = [&](Framing, Method) -> const std::vector<DeRecord>& { return per_asset; };
    TableOptions opts;
    opts.methods = {Method::Count};

    const auto inv = build_preset_table(Preset::LongVsInverse, source, reg, opts);
    ASSERT_EQ(inv.sections.size(), 1u);
    ASSERT_EQ(inv.sections[0].rows.size(), 2u);
    EXPECT_EQ(inv.sections[0].rows[0].label, "-1x = 1x");
    EXPECT_EQ(inv.sections[0].rows[1].label, "-7x = 7x");
    EXPECT_TRUE(inv.sections[0].rows[0].cells[0]);
    EXPECT_FALSE(inv.sections[0].rows[0].cells[1]);

    const auto split = build_preset_table(Preset::ContextSplit, source, reg, opts);
    ASSERT_EQ(split.sections.size(), 2u);
    EXPECT_EQ(split.sections[0].row_header, "Positive Portfolio");
    EXPECT_EQ(split.sections[1].row_header, "Negative Portfolio");
    EXPECT_EQ(split.sections[0].rows[0].label, "1x = -1x");

    const auto longs = build_preset_table(Preset::LeverageLong, source, reg, opts);
    ASSERT_EQ(longs.sections.size(), 2u);
    EXPECT_EQ(longs.sections[0].title, "Negative Portfolio");
    std::vector<std::string> labels;
    for (const auto& r : longs.sections[0].rows) labels.push_back(r.label);
    EXPECT_EQ(labels, (std::vector<std::string>{"1x = 2x", "1x = 7x", "2x = 7x"}));

    const auto shorts = build_preset_table(Preset::LeverageShort, source, reg, opts);
    labels.clear();
    for (const auto& r : shorts.sections[1].rows) labels.push_back(r.label);
    EXPECT_EQ(labels, (std::vector<std::string>{"-1x = -3x", "-1x = -7x", "-3x = -7x"}));

    const auto state = build_preset_table(Preset::PortfolioState, source, reg, opts);
    ASSERT_EQ(state.sections.size(), 2u);
    EXPECT_EQ(state.sections[0].title, "Short ETFs tested in Negative vs Positive Portfolio");
    EXPECT_EQ(state.sections[0].rows[0].label, "-1x = -1x");
    EXPECT_EQ(state.sections[1].rows.back().label, "7x = 7x");

    const std::string text = render_table(split);
    EXPECT_NE(text.find("Positive Portfolio"), std::string::npos);
    EXPECT_EQ(text.substr(text.size() - 31), "* p<0.1, ** p<0.05, *** p<0.01\n");
}

TEST(Presets, EmptyGroupsRaiseUnlessSkipped) {
    const auto reg = registry();
    const std::vector<DeRecord> none;
    const RecordSource source = [&](Framing, Method) -> const std::vector<DeRecord>& { return none; };
    EXPECT_EQ(dispo::testing::kind_of([&] { build_preset_table(Preset::LongVsInverse, source, reg); }),
              ErrorKind::EmptyGroup);
    TableOptions skip;
    skip.skip_empty = true;
    const auto t = build_preset_table(Preset::LongVsInverse, source, reg, skip);
    EXPECT_NE(render_table(t).find("n/a"), std::string::npos);
}
