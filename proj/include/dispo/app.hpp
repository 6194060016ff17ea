#pragma once

// Command implementations behind the `dispo` executable. Each command takes
// a RunConfig, writes human output to `out`, diagnostics to `err`, and
// returns the process exit code.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dispo/aggregate.hpp"
#include "dispo/compare.hpp"
#include "dispo/dataset.hpp"
#include "dispo/engine.hpp"
#include "dispo/error.hpp"
#include "dispo/ingest.hpp"
#include "dispo/prices.hpp"
#include "dispo/synth.hpp"

namespace dispo::app {

struct RunConfig {
    std::string transactions_path;
    std::string registry_path;
    Framing framing = Framing::Integrated;
    std::optional<Level> level;  // default_level(framing) when unset
    std::vector<Method> methods = {Method::Count, Method::Total, Method::Value};
    EvalScope eval_scope = EvalScope::EveryEvent;
    ContextRule context_rule = ContextRule::ExcludeTradedAsset;
    ZeroDenominator zero_denominator = ZeroDenominator::Exclude;
    ValueAggregation value_aggregation = ValueAggregation::Sum;
    double bin_width = 0.1;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::uint64_t seed = 42;
    std::string out_dir;
    bool lenient = false;
    bool export_prices = false;
};

struct CompareSpec {
    std::optional<Preset> preset;
    std::string group_a;
    std::string group_b;
    Framing framing = Framing::Integrated;  // for custom groups
    int decimals = 3;
    bool skip_empty = false;
};

struct SynthSpec {
    std::size_t investors = 100;
    synth::BehaviorProfile profile;
    std::size_t max_transactions = 0;  // 0 = no cap
};

// Distinct exit code per failure kind; 1 is reserved for usage errors.
inline int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::SchemaError: return 2;
        case ErrorKind::MalformedRow: return 3;
        case ErrorKind::Io: return 4;
        case ErrorKind::DuplicateAsset: return 5;
        case ErrorKind::ZeroLeverage: return 6;
        case ErrorKind::EmptyDataset: return 7;
        case ErrorKind::MissingPrice: return 8;
        case ErrorKind::InvalidBinWidth: return 9;
        case ErrorKind::EmptySample: return 10;
        case ErrorKind::EmptyGroup: return 11;
        case ErrorKind::InvalidProfile: return 12;
    }
    return 13;
}

struct Loaded {
    ParsedTransactions parsed;
    std::optional<InstrumentRegistry> registry;
    Dataset data;
};

inline Loaded load(const RunConfig& cfg, bool need_registry) {
    Loaded l;
    if (cfg.transactions_path.empty()) throw Error(ErrorKind::Io, "no transactions file given");
    const std::string text = csv::read_file(cfg.transactions_path);
    l.parsed = parse_transactions(std::string_view(text), ParseOptions{cfg.lenient});
    if (!cfg.registry_path.empty()) {
        l.registry = parse_instruments(std::string_view(csv::read_file(cfg.registry_path)));
    } else if (need_registry) {
        throw Error(ErrorKind::Io, "this command needs --registry");
    }
    l.data = Dataset(l.parsed.transactions);
    return l;
}

inline EngineOptions engine_options(const RunConfig& cfg) {
    return {cfg.eval_scope, cfg.context_rule, cfg.threads};
}

inline AggregateOptions aggregate_options(const RunConfig& cfg) {
    return {cfg.zero_denominator, cfg.value_aggregation};
}

namespace detail {

inline std::filesystem::path out_path(const RunConfig& cfg, const std::string& name) {
    std::filesystem::path dir = cfg.out_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(cfg.out_dir);
    std::filesystem::create_directories(dir);
    return dir / name;
}

template <class Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    fn(f);
    if (!f) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

inline std::string lower(std::string_view s) { return csv::lower(s); }

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        err << "dispo: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "dispo: IoError: " << e.what() << '\n';
        return exit_code(ErrorKind::Io);
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        const Loaded l = load(cfg, false);
        const auto& p = l.parsed;
        for (const auto& r : p.rejects) err << "skipped line " << r.line << ": " << r.reason << '\n';
        out << "rows: " << p.rows << ", accepted: " << p.transactions.size()
            << ", rejected: " << p.rejects.size() << '\n';
        if (!p.rejects.empty()) {
            out << p.rejects.size() << (p.rejects.size() == 1 ? " row skipped" : " rows skipped")
                << '\n';
        }
        if (l.registry) {
            out << "instruments: " << l.registry->size() << '\n';
            for (const auto& id : l.data.asset_ids()) {
                if (!l.registry->contains(id)) out << "unregistered asset: " << id << '\n';
            }
        }
        out << render_summary(summarize(p.transactions));
        return 0;
    });
}

// Records and histograms for every selected method under cfg.framing.
inline int cmd_compute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        const Loaded l = load(cfg, false);
        const TallyTable table = accrue_all(l.data, engine_options(cfg));
        const Level level = cfg.level.value_or(default_level(cfg.framing));
        const std::string framing(to_string(cfg.framing));

        auto emit = [&](const std::string& name, auto&& fn) {
            const auto path = detail::out_path(cfg, name);
            detail::write_file(path, fn);
            out << "wrote " << path.string() << '\n';
        };

        emit("tallies.csv", [&](std::ostream& f) {
            write_tallies(f, table, l.data.investor_ids(), l.data.asset_ids());
        });
        for (Method m : cfg.methods) {
            const auto records = aggregate(table, l.data, level, cfg.framing, m, aggregate_options(cfg));
            const std::string stem = framing + "_" + detail::lower(to_string(m));
            emit("records_" + stem + ".csv", [&](std::ostream& f) { write_records(f, records); });
            const auto bins = histogram(std::span<const DeRecord>(records), cfg.bin_width);
            emit("histogram_" + stem + ".csv", [&](std::ostream& f) { write_histogram(f, bins); });
            if (cfg.framing != Framing::Narrow) {
                for (Context c : {Context::Positive, Context::Negative}) {
                    std::vector<DeRecord> part;
                    for (const auto& r : records) {
                        if (r.context == c) part.push_back(r);
                    }
                    const auto pb = histogram(std::span<const DeRecord>(part), cfg.bin_width);
                    emit("histogram_" + stem + "_" + detail::lower(to_string(c)) + ".csv",
                         [&](std::ostream& f) { write_histogram(f, pb); });
                }
            }
        }
        if (cfg.export_prices) {
            const auto series = build_series(l.parsed.transactions);
            emit("prices.csv", [&](std::ostream& f) { write_series(f, series); });
        }
        return 0;
    });
}

namespace detail {

// Lazily computes per-asset records for each (framing, method).
class RecordCache {
public:
    RecordCache(const TallyTable& table, const Dataset& data, AggregateOptions opts)
        : table_(table), data_(data), opts_(opts) {}

    const std::vector<DeRecord>& get(Framing f, Method m) {
        // Wide and integrated share the context split; per-asset level either way.
        const Framing key = f == Framing::Narrow ? Framing::Narrow : Framing::Integrated;
        auto it = cache_.find({key, m});
        if (it == cache_.end()) {
            it = cache_.emplace(std::pair{key, m}, aggregate(table_, data_, Level::PerAsset, key, m, opts_))
                     .first;
        }
        return it->second;
    }

private:
    const TallyTable& table_;
    const Dataset& data_;
    AggregateOptions opts_;
    std::map<std::pair<Framing, Method>, std::vector<DeRecord>> cache_;
};

}  // namespace detail

inline int cmd_compare(const RunConfig& cfg, const CompareSpec& spec, std::ostream& out,
                       std::ostream& err) {
    return detail::guarded(err, [&] {
        const Loaded l = load(cfg, true);
        const TallyTable table = accrue_all(l.data, engine_options(cfg));
        detail::RecordCache cache(table, l.data, aggregate_options(cfg));
        const RecordSource source = [&cache](Framing f, Method m) -> const std::vector<DeRecord>& {
            return cache.get(f, m);
        };
        TableOptions topts;
        topts.skip_empty = spec.skip_empty;
        topts.methods = cfg.methods;

        ComparisonTable result;
        std::string name;
        if (spec.preset) {
            result = build_preset_table(*spec.preset, source, *l.registry, topts);
            for (auto [n, p] : kPresetNames) {
                if (p == *spec.preset) name = std::string(n);
            }
        } else {
            result = build_custom_table(parse_filter(spec.group_a), parse_filter(spec.group_b),
                                        spec.framing, source, *l.registry, topts);
            name = "custom";
        }
        const std::string text = render_table(result, spec.decimals);
        out << text;
        if (!cfg.out_dir.empty()) {
            detail::write_file(detail::out_path(cfg, "compare_" + name + ".txt"),
                               [&](std::ostream& f) { f << text; });
            detail::write_file(detail::out_path(cfg, "compare_" + name + ".csv"),
                               [&](std::ostream& f) { write_table_csv(f, result, spec.decimals); });
        }
        return 0;
    });
}

inline int cmd_synth(const RunConfig& cfg, const SynthSpec& spec, std::ostream& out,
                     std::ostream& err) {
    return detail::guarded(err, [&] {
        synth::BehaviorProfile profile = spec.profile;
        profile.seed = cfg.seed;
        auto pop = synth::generate_population(spec.investors, profile);
        if (spec.max_transactions > 0 && pop.transactions.size() > spec.max_transactions) {
            pop.transactions.resize(spec.max_transactions);
        }
        const auto tx_path = detail::out_path(cfg, "transactions.csv");
        const auto reg_path = detail::out_path(cfg, "registry.csv");
        detail::write_file(tx_path, [&](std::ostream& f) { write_transactions(f, pop.transactions); });
        detail::write_file(reg_path, [&](std::ostream& f) { write_instruments(f, pop.registry); });
        out << "wrote " << tx_path.string() << " (" << pop.transactions.size() << " transactions)\n";
        out << "wrote " << reg_path.string() << " (" << pop.registry.size() << " instruments)\n";
        return 0;
    });
}

namespace detail {

inline std::string render_histogram(const std::string& title, std::span<const HistogramBin> bins) {
    std::size_t peak = 0;
    for (const auto& b : bins) peak = std::max(peak, b.count);
    std::ostringstream os;
    os << title << '\n';
    for (std::size_t i = 0; i < bins.size(); ++i) {
        char edge[64];
        const double hi = i + 1 < bins.size() ? bins[i + 1].lower : 1.0;
        std::snprintf(edge, sizeof edge, "[%6.2f, %5.2f%c", bins[i].lower, hi,
                      i + 1 < bins.size() ? ')' : ']');
        const std::size_t bar = peak == 0 ? 0 : (bins[i].count * 40 + peak - 1) / peak;
        os << edge << ' ' << std::string(bar, '#') << ' ' << bins[i].count << '\n';
    }
    return os.str();
}

}  // namespace detail

// Summary table, narrow and wide Count histograms and, with a registry,
// every preset comparison table.
inline int cmd_report(const RunConfig& cfg, const CompareSpec& spec, std::ostream& out,
                      std::ostream& err) {
    return detail::guarded(err, [&] {
        const Loaded l = load(cfg, false);
        const TallyTable table = accrue_all(l.data, engine_options(cfg));
        std::ostringstream rep;
        rep << "Descriptive Summary of Investors\n" << render_summary(summarize(l.parsed.transactions))
            << '\n';

        const auto narrow = aggregate(table, l.data, Level::InvestorPooled, Framing::Narrow,
                                      Method::Count, aggregate_options(cfg));
        rep << detail::render_histogram("Histogram of the disposition effect (method Count)",
                                        histogram(std::span<const DeRecord>(narrow), cfg.bin_width))
            << '\n';
        const auto wide = aggregate(table, l.data, Level::InvestorPooled, Framing::Wide, Method::Count,
                                    aggregate_options(cfg));
        for (Context c : {Context::Positive, Context::Negative}) {
            std::vector<DeRecord> part;
            for (const auto& r : wide) {
                if (r.context == c) part.push_back(r);
            }
            rep << detail::render_histogram(
                       "Histogram of the wide framing disposition effect (method Count), " +
                           std::string(to_string(c)) + " portfolio",
                       histogram(std::span<const DeRecord>(part), cfg.bin_width))
                << '\n';
        }

        if (l.registry) {
            detail::RecordCache cache(table, l.data, aggregate_options(cfg));
            const RecordSource source = [&cache](Framing f, Method m) -> const std::vector<DeRecord>& {
                return cache.get(f, m);
            };
            TableOptions topts;
            topts.skip_empty = true;
            topts.methods = cfg.methods;
            for (auto [name, preset] : kPresetNames) {
                rep << render_table(build_preset_table(preset, source, *l.registry, topts), spec.decimals)
                    << '\n';
            }
        }
        const std::string text = rep.str();
        out << text;
        if (!cfg.out_dir.empty()) {
            detail::write_file(detail::out_path(cfg, "report.txt"), [&](std::ostream& f) { f << text; });
        }
        return 0;
    });
}

}  // namespace dispo::app
