#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <map>
#include <string>

#include "dispo/app.hpp"

namespace {

using namespace dispo;

const std::map<std::string, Framing> kFramings = {
    {"narrow", Framing::Narrow}, {"wide", Framing::Wide}, {"integrated", Framing::Integrated}};
const std::map<std::string, Method> kMethods = {
    {"count", Method::Count}, {"total", Method::Total}, {"value", Method::Value}};
const std::map<std::string, Level> kLevels = {{"asset", Level::PerAsset},
                                              {"pooled", Level::InvestorPooled},
                                              {"mean", Level::InvestorMeanOfAssets}};
const std::map<std::string, EvalScope> kScopes = {{"every-event", EvalScope::EveryEvent},
                                                  {"sells-only", EvalScope::SellsOnly}};
const std::map<std::string, ContextRule> kContextRules = {
    {"exclude-traded", ContextRule::ExcludeTradedAsset},
    {"include-traded", ContextRule::IncludeTradedAsset}};
const std::map<std::string, ZeroDenominator> kZeroPolicies = {{"exclude", ZeroDenominator::Exclude},
                                                              {"zero", ZeroDenominator::Zero}};
const std::map<std::string, ValueAggregation> kValueAggs = {{"sum", ValueAggregation::Sum},
                                                            {"mean", ValueAggregation::Mean}};
const std::map<std::string, Preset> kPresets = {
    {"leverage-long", Preset::LeverageLong},
    {"leverage-short", Preset::LeverageShort},
    {"long-vs-inverse", Preset::LongVsInverse},
    {"context-split", Preset::ContextSplit},
    {"portfolio-state", Preset::PortfolioState}};

// Enum options are taken as strings and mapped on parse; CLI11's own enum
// handling trips over the library's to_string overloads.
template <class T>
CLI::Option* add_choice(CLI::App* cmd, const std::string& name, T& target,
                        const std::map<std::string, T>& choices, const std::string& desc) {
    return cmd->add_option(name, desc)
        ->check(CLI::IsMember(choices, CLI::ignore_case))
        ->each([&target, &choices](const std::string& v) { target = choices.at(dispo::csv::lower(v)); });
}

void add_input(CLI::App* cmd, app::RunConfig& cfg, bool registry_required) {
    cmd->add_option("-t,--transactions", cfg.transactions_path, "Transaction log (CSV)")
        ->required();
    auto* reg = cmd->add_option("-r,--registry", cfg.registry_path, "Instrument registry (CSV)");
    if (registry_required) reg->required();
    cmd->add_flag("--lenient", cfg.lenient, "Skip malformed rows instead of failing");
}

void add_engine(CLI::App* cmd, app::RunConfig& cfg) {
    add_choice(cmd, "--eval-scope", cfg.eval_scope, kScopes, "every-event | sells-only");
    add_choice(cmd, "--context-rule", cfg.context_rule, kContextRules, "exclude-traded | include-traded");
    add_choice(cmd, "--zero-denominator", cfg.zero_denominator, kZeroPolicies, "exclude | zero");
    add_choice(cmd, "--value-agg", cfg.value_aggregation, kValueAggs, "sum | mean");
    cmd->add_option("-m,--method", "count | total | value (repeatable)")
        ->check(CLI::IsMember(kMethods, CLI::ignore_case))
        ->expected(1, 3)
        ->each([&cfg, fresh = true](const std::string& v) mutable {
            if (fresh) cfg.methods.clear();
            fresh = false;
            const Method m = kMethods.at(dispo::csv::lower(v));
            if (std::find(cfg.methods.begin(), cfg.methods.end(), m) == cfg.methods.end()) {
                cfg.methods.push_back(m);
            }
        });
    cmd->add_option("-j,--threads", cfg.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
    cmd->add_option("--bins", cfg.bin_width, "Histogram bin width");
    cmd->add_option("-o,--out", cfg.out_dir, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Disposition effect analytics for leveraged and inverse instruments"};
    cli.require_subcommand(1);

    app::RunConfig cfg;
    app::CompareSpec cmp;
    app::SynthSpec syn;

    auto* validate = cli.add_subcommand("validate", "Parse inputs and print a dataset summary");
    add_input(validate, cfg, false);

    auto* compute = cli.add_subcommand("compute", "Write DE records, histograms and raw tallies");
    add_input(compute, cfg, false);
    add_engine(compute, cfg);
    add_choice(compute, "-f,--framing", cfg.framing, kFramings, "narrow | wide | integrated");
    compute->add_option("-l,--level", "asset | pooled | mean")
        ->check(CLI::IsMember(kLevels, CLI::ignore_case))
        ->each([&cfg](const std::string& v) { cfg.level = kLevels.at(dispo::csv::lower(v)); });
    compute->add_flag("--export-prices", cfg.export_prices, "Also write the per-asset price series");

    auto* compare = cli.add_subcommand("compare", "Mann-Whitney comparison tables");
    add_input(compare, cfg, true);
    add_engine(compare, cfg);
    auto* preset_opt = compare->add_option("-p,--preset", "Preset table")
                           ->check(CLI::IsMember(kPresets, CLI::ignore_case))
                           ->each([&cmp](const std::string& v) { cmp.preset = kPresets.at(dispo::csv::lower(v)); });
    auto* a_opt = compare->add_option("--a", cmp.group_a, "Group A filter, e.g. lev=3,ctx=positive");
    auto* b_opt = compare->add_option("--b", cmp.group_b, "Group B filter");
    a_opt->needs(b_opt);
    b_opt->needs(a_opt);
    preset_opt->excludes(a_opt)->excludes(b_opt);
    add_choice(compare, "-f,--framing", cmp.framing, kFramings, "Framing for custom groups");
    compare->add_option("--decimals", cmp.decimals, "Decimals in table cells")->check(CLI::Range(0, 12));
    compare->add_flag("--skip-empty", cmp.skip_empty, "Print n/a for empty groups instead of failing");

    auto* synth = cli.add_subcommand("synth", "Generate a synthetic population");
    synth->add_option("-n,--investors", syn.investors, "Number of investors")->check(CLI::PositiveNumber);
    synth->add_option("--p-gain", syn.profile.p_realize_gain, "Probability of realizing a gain");
    synth->add_option("--p-loss", syn.profile.p_realize_loss, "Probability of realizing a loss");
    synth->add_option("--assets", syn.profile.n_assets, "Number of instruments");
    synth->add_option("--leverage", syn.profile.leverage_menu, "Leverage menu, cycled over assets")
        ->take_all();
    synth->add_option("--events", syn.profile.horizon_events, "Trading steps per investor");
    synth->add_option("--max-transactions", syn.max_transactions, "Truncate the log to this length");
    synth->add_option("-s,--seed", cfg.seed, "RNG seed");
    synth->add_option("-o,--out", cfg.out_dir, "Output directory");

    auto* report = cli.add_subcommand("report", "Summary, histograms and every preset table");
    add_input(report, cfg, false);
    add_engine(report, cfg);
    report->add_option("--decimals", cmp.decimals, "Decimals in table cells")->check(CLI::Range(0, 12));

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return cli.exit(e);
        std::cerr << "dispo: UsageError: " << e.what() << '\n';
        return 1;
    }

    if (*validate) return app::cmd_validate(cfg, std::cout, std::cerr);
    if (*compute) return app::cmd_compute(cfg, std::cout, std::cerr);
    if (*compare) {
        if (!cmp.preset && cmp.group_a.empty()) {
            std::cerr << "dispo: UsageError: compare needs --preset or --a/--b\n";
            return 1;
        }
        return app::cmd_compare(cfg, cmp, std::cout, std::cerr);
    }
    if (*synth) return app::cmd_synth(cfg, syn, std::cout, std::cerr);
    if (*report) return app::cmd_report(cfg, cmp, std::cout, std::cerr);
    return 1;
}
