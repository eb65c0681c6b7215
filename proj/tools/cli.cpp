#include "cli.hpp"

#include "parallel.hpp"
#include "report.hpp"

#include "synthscreen/analysis.hpp"
#include "synthscreen/bootstrap.hpp"
#include "synthscreen/fixture.hpp"
#include "synthscreen/manifest.hpp"
#include "synthscreen/object_metrics.hpp"
#include "synthscreen/screening.hpp"
#include "synthscreen/stats.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace synthscreen::cli {

namespace {

enum class LogLevel { error = 0, warn = 1, info = 2 };

class Log {
public:
    Log(std::ostream& err, LogLevel level) : err_(&err), level_(level) {}

    void error(const std::string& msg) const { emit(LogLevel::error, "error", msg); }
    void warn(const std::string& msg) const { emit(LogLevel::warn, "warning", msg); }
    void info(const std::string& msg) const { emit(LogLevel::info, "info", msg); }

private:
    void emit(LogLevel l, const char* tag, const std::string& msg) const {
        if (l <= level_) *err_ << tag << ": " << msg << "\n";
    }

    std::ostream* err_;
    LogLevel level_;
};

struct Common {
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out;
    std::string log_level = "warn";
};

LogLevel parse_log_level(const std::string& s) {
    if (s == "error") return LogLevel::error;
    if (s == "warn") return LogLevel::warn;
    if (s == "info") return LogLevel::info;
    throw Error("unknown log level '" + s + "'");
}

void require_file(const std::string& path, const char* what) {
    if (path.empty()) throw Error(std::string("missing required input: ") + what);
    if (!fs::is_regular_file(path)) throw Error(std::string(what) + " not found: " + path);
}

std::vector<int> parse_budgets(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        int v = 0;
        const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc{} || p != item.data() + item.size() || v <= 0) {
            throw Error("bad budget list '" + text + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) throw Error("empty budget list");
    return out;
}

/// Writes to `path`, or to `out` when the path is empty or "-".
void emit_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_text_file(p, text);
}

std::string pool_key(const PoolSpec& spec) {
    std::string k;
    for (const auto& [enc, path] : spec.embeddings) k += std::string(to_string(enc)) + "=" + path.string() + ";";
    if (spec.labels) k += "labels=" + spec.labels->dir.string() + "|" + spec.labels->index.string();
    return k;
}

// ---------------------------------------------------------------- metrics

struct MetricsArgs {
    std::string manifest;
    std::optional<std::uint64_t> plan_seed;
    std::size_t trials = kDefaultTrials;
    std::string match_size = "auto";
    std::string plan_out;
};

int cmd_metrics(const MetricsArgs& a, const Common& c, std::ostream& out, const Log& log) {
    require_file(a.manifest, "manifest");
    const Manifest manifest = load_manifest(a.manifest);
    check_manifest_paths(manifest);
    const std::uint64_t seed = a.plan_seed.value_or(c.seed);
    const unsigned threads = resolve_threads(c.threads);

    struct Job {
        const DatasetSpec* dataset;
        const ConfigSpec* config;
        std::size_t plan;
    };
    std::vector<BootstrapPlan> plans;
    std::vector<Pool> real_pools;
    std::vector<Job> jobs;
    for (const auto& ds : manifest.datasets) {
        Pool real = load_pool(ds.real);
        std::size_t n_match = 0;
        if (a.match_size == "auto") {
            n_match = auto_match_size(ds.real_train_size);
        } else {
            const auto& s = a.match_size;
            const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), n_match);
            if (ec != std::errc{} || p != s.data() + s.size() || n_match == 0) {
                throw Error("bad --match-size '" + s + "'");
            }
        }
        plans.push_back(make_plan(ds.name, real.size(), n_match, a.trials, seed));
        real_pools.push_back(std::move(real));
        log.info("dataset " + ds.name + ": real pool " + std::to_string(plans.back().real_pool_size) +
                 ", N=" + std::to_string(n_match));
        for (const auto& cfg : ds.configs) jobs.push_back({&ds, &cfg, plans.size() - 1});
    }

    if (!a.plan_out.empty()) {
        fs::create_directories(a.plan_out);
        for (const auto& plan : plans) {
            write_text_file(fs::path(a.plan_out) / (plan.dataset + ".plan.json"), plan_to_json(plan));
        }
    }

    // Distinct synthetic pools are loaded once, before any parallel work.
    std::map<std::string, std::size_t> pool_index;
    std::vector<std::optional<Pool>> pools;
    std::vector<std::string> pool_errors;
    std::vector<std::size_t> job_pool(jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const std::string k = pool_key(jobs[i].config->pool);
        auto [it, inserted] = pool_index.try_emplace(k, pools.size());
        if (inserted) {
            try {
                pools.emplace_back(load_pool(jobs[i].config->pool));
                pool_errors.emplace_back();
            } catch (const std::exception& e) {
                pools.emplace_back(std::nullopt);
                pool_errors.emplace_back(e.what());
            }
        }
        job_pool[i] = it->second;
    }

    std::vector<std::vector<MetricRecord>> results(jobs.size());
    std::vector<std::string> errors(jobs.size());
    parallel_for(jobs.size(), threads, [&](std::size_t i) {
        const auto& job = jobs[i];
        const auto& ds = *job.dataset;
        const ConfigKey key{ds.name, ds.regimes.front(), job.config->generator, job.config->aug_ratio};
        try {
            const auto& pool = pools[job_pool[i]];
            if (!pool) throw Error(pool_errors[job_pool[i]]);
            const std::size_t want =
                job.config->pool_size.value_or(ratio_pool_size(job.config->aug_ratio, ds.real_train_size));
            if (want > pool->size()) {
                throw Error("synthetic pool has " + std::to_string(pool->size()) + " items, configuration needs " +
                            std::to_string(want));
            }
            const Pool syn = want == pool->size() ? *pool : pool->prefix(want);
            results[i] = run_config(plans[job.plan], real_pools[job.plan], syn, key);
        } catch (const std::exception& e) {
            errors[i] = to_string(key) + ": " + e.what();
        }
    });

    std::vector<MetricRecord> rows;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (!errors[i].empty()) {
            ++failed;
            log.error(errors[i]);
            continue;
        }
        for (Regime r : jobs[i].dataset->regimes) {
            for (auto rec : results[i]) {
                rec.key.regime = r;
                rows.push_back(std::move(rec));
            }
        }
        log.info("done " + to_string(ConfigKey{jobs[i].dataset->name, jobs[i].dataset->regimes.front(),
                                               jobs[i].config->generator, jobs[i].config->aug_ratio}));
    }
    if (failed == jobs.size()) throw Error("all " + std::to_string(failed) + " configurations failed");
    emit_text(c.out.empty() ? "metrics.csv" : c.out, format_metrics(make_metric_table(std::move(rows))), out);
    if (failed > 0) {
        log.error(std::to_string(failed) + " of " + std::to_string(jobs.size()) + " configurations failed");
        return kExitPartial;
    }
    return kExitOk;
}

// ---------------------------------------------------------------- stats

struct StatsArgs {
    std::string manifest;
    std::string labels;
    std::string index;
    std::string name = "dataset";
    bool sample_std = false;
};

int cmd_stats(const StatsArgs& a, const Common& c, std::ostream& out, const Log& log) {
    const StdKind kind = a.sample_std ? StdKind::sample : StdKind::population;
    std::vector<std::pair<std::string, RegimeStats>> rows;
    if (!a.manifest.empty()) {
        require_file(a.manifest, "manifest");
        const Manifest m = load_manifest(a.manifest);
        for (const auto& ds : m.datasets) {
            if (!ds.real.labels) {
                log.warn("dataset " + ds.name + " has no real labels; skipped");
                continue;
            }
            rows.emplace_back(ds.name,
                              regime_stats(load_labels(ds.real.labels->dir, ds.real.labels->index),
                                           kSmallAreaThreshold, kind));
        }
    } else {
        if (a.labels.empty() || a.index.empty()) throw Error("stats needs --manifest or --labels with --index");
        require_file(a.index, "label index");
        rows.emplace_back(a.name, regime_stats(load_labels(a.labels, a.index), kSmallAreaThreshold, kind));
    }
    if (rows.empty()) throw Error("no labelled datasets");
    emit_text(c.out, format_regime_stats(rows), out);
    return kExitOk;
}

// ---------------------------------------------------------------- correlate / robustness / screen

struct TableArgs {
    std::string metrics;
    std::string runs;
};

std::pair<MetricTable, RunsTable> load_tables(const TableArgs& a) {
    require_file(a.metrics, "metrics table");
    require_file(a.runs, "runs table");
    return {load_metrics(a.metrics), load_runs(a.runs)};
}

struct CorrelateArgs {
    std::string view = "raw";
    std::string corr = "spearman";
    std::size_t permutations = 0;
};

int cmd_correlate(const TableArgs& t, const CorrelateArgs& a, const Common& c, std::ostream& out) {
    const View view = parse_view(a.view);
    const CorrType corr = parse_corr_type(a.corr);
    const auto [metrics, runs] = load_tables(t);
    const auto cells = correlation_matrix(metrics, runs, view, corr, {a.permutations, c.seed});
    emit_text(c.out, format_heatmap(cells), out);
    return kExitOk;
}

int cmd_robustness(const TableArgs& t, const std::string& budgets_text, const Common& c, std::ostream& out) {
    const auto budgets = parse_budgets(budgets_text);
    const auto [metrics, runs] = load_tables(t);
    emit_text(c.out,
              format_robustness(per_budget_correlations(metrics, runs, budgets), fixed_effects_table(metrics, runs),
                                budgets),
              out);
    return kExitOk;
}

std::vector<std::string> read_shortlist(const std::string& path) {
    require_file(path, "shortlist");
    std::vector<std::string> names;
    std::stringstream ss(read_text_file(path));
    std::string line;
    while (std::getline(ss, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        names.push_back(line);
    }
    if (names.empty()) throw Error("shortlist file is empty: " + path);
    return names;
}

std::vector<std::string> auto_shortlist(const MetricTable& metrics, const RunsTable& runs, const Common& c) {
    const auto cells = correlation_matrix(metrics, runs, View::residual, CorrType::spearman, {0, c.seed});
    return screening_shortlist(cells);
}

int cmd_screen(const TableArgs& t, const std::string& shortlist, const std::string& budgets_text,
               const Common& c, std::ostream& out, const Log& log) {
    const auto budgets = parse_budgets(budgets_text);
    const auto [metrics, runs] = load_tables(t);
    const auto names = shortlist == "auto" ? auto_shortlist(metrics, runs, c) : read_shortlist(shortlist);
    if (names.empty()) {
        log.warn("no metric passes the shortlist rule; nothing to screen");
    }
    emit_text(c.out, format_screening(screening_summary(metrics, runs, names, budgets), false), out);
    return kExitOk;
}

// ---------------------------------------------------------------- seedci

struct PairSpec {
    std::string dataset;
    Regime regime = Regime::scratch;
    std::string generator;
    int ratio = 0;
};

PairSpec parse_pair(const std::string& text) {
    const auto bad = [&] {
        return Error("bad --pair '" + text + "', expected dataset:regime:baseline-vs-generator@ratio");
    };
    const auto c1 = text.find(':');
    const auto c2 = c1 == std::string::npos ? c1 : text.find(':', c1 + 1);
    if (c2 == std::string::npos) throw bad();
    PairSpec p;
    p.dataset = text.substr(0, c1);
    p.regime = parse_regime(text.substr(c1 + 1, c2 - c1 - 1));
    const std::string rest = text.substr(c2 + 1);
    const std::string lead = std::string(kBaselineGenerator) + "-vs-";
    if (!rest.starts_with(lead)) throw bad();
    const auto at = rest.rfind('@');
    if (at == std::string::npos || at <= lead.size()) throw bad();
    p.generator = rest.substr(lead.size(), at - lead.size());
    std::string ratio = rest.substr(at + 1);
    if (!ratio.empty() && ratio.back() == '%') ratio.pop_back();
    const auto [ptr, ec] = std::from_chars(ratio.data(), ratio.data() + ratio.size(), p.ratio);
    if (p.dataset.empty() || ec != std::errc{} || ptr != ratio.data() + ratio.size()) throw bad();
    return p;
}

int cmd_seedci(const std::string& runs_path, const std::string& pair, double level, const Common& c,
               std::ostream& out) {
    require_file(runs_path, "runs table");
    const RunsTable runs = load_runs(runs_path);
    const PairSpec p = parse_pair(pair);
    const ConfigKey base{p.dataset, p.regime, kBaselineGenerator, kBaselineRatio};
    const ConfigKey aug{p.dataset, p.regime, p.generator, p.ratio};
    validate(aug);
    std::map<int, double> b, g;
    for (const auto& r : runs.records) {
        if (r.key == base) b[r.seed] = r.map5095;
        if (r.key == aug) g[r.seed] = r.map5095;
    }
    if (b.empty()) throw Error("no runs for " + to_string(base));
    if (g.empty()) throw Error("no runs for " + to_string(aug));
    std::vector<double> bv, gv;
    for (const auto& [seed, v] : b) {
        const auto it = g.find(seed);
        if (it == g.end()) throw Error("seed " + std::to_string(seed) + " missing for " + to_string(aug));
        bv.push_back(v);
        gv.push_back(it->second);
    }
    if (g.size() != b.size()) throw Error("seed sets differ between baseline and " + to_string(aug));

    SeedCiReport rep;
    rep.dataset = p.dataset;
    rep.regime = p.regime;
    rep.augmented_label = p.generator + "@" + std::to_string(p.ratio) + "%";
    rep.base_mean = stats::mean(bv);
    rep.base_std = stats::sample_std(bv);
    rep.aug_mean = stats::mean(gv);
    rep.aug_std = stats::sample_std(gv);
    rep.ci = seed_ci(bv, gv, level);
    emit_text(c.out, format_seed_ci(rep), out);
    return kExitOk;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
    std::string manifest;
    std::size_t top_k = 15;
    std::string budgets = "25,50,100";
    std::size_t permutations = 0;
};

int cmd_report(const TableArgs& t, const ReportArgs& a, const Common& c, const Log& log) {
    const auto budgets = parse_budgets(a.budgets);
    if (!a.manifest.empty()) require_file(a.manifest, "manifest");
    const auto [metrics, runs] = load_tables(t);
    if (join_tables(metrics, runs).empty()) throw Error("join of metrics and runs produced zero rows");

    const fs::path dir = c.out.empty() ? fs::path("report") : fs::path(c.out);
    fs::create_directories(dir);

    nlohmann::ordered_json index;
    index["seed"] = c.seed;
    index["budgets"] = budgets;
    nlohmann::ordered_json files = nlohmann::ordered_json::object();
    nlohmann::ordered_json warnings = nlohmann::ordered_json::array();
    auto put = [&](const std::string& role, const std::string& name, const std::string& text) {
        write_text_file(dir / name, text);
        files[role] = name;
    };
    auto warn = [&](const std::string& msg) {
        log.warn(msg);
        warnings.push_back(msg);
    };

    bool has_baseline = false;
    for (const auto& r : runs.records) has_baseline = has_baseline || r.key.is_baseline();
    if (has_baseline) {
        put("best_vs_baseline", "table2_best_vs_baseline.csv", format_best_vs_baseline(best_vs_baseline(runs)));
    } else {
        warn("runs table has no baseline rows; best-vs-baseline table omitted");
    }

    if (!a.manifest.empty()) {
        const Manifest m = load_manifest(a.manifest);
        std::vector<std::pair<std::string, RegimeStats>> rows;
        for (const auto& ds : m.datasets) {
            if (ds.real.labels) {
                rows.emplace_back(ds.name, regime_stats(load_labels(ds.real.labels->dir, ds.real.labels->index)));
            }
        }
        if (rows.empty()) {
            warn("manifest has no real label sets; regime statistics omitted");
        } else {
            put("regime_stats", "table3_regime_stats.csv", format_regime_stats(rows));
        }
    } else {
        warn("no manifest given; regime statistics omitted");
    }

    std::vector<CorrCell> residual_spearman;
    for (View v : {View::raw, View::residual}) {
        for (CorrType ct : {CorrType::pearson, CorrType::spearman}) {
            const auto cells = correlation_matrix(metrics, runs, v, ct, {a.permutations, c.seed});
            const std::string role = std::string("heatmap_") + to_string(v) + "_" + to_string(ct);
            put(role, role + ".csv", format_heatmap(cells));
            if (v == View::residual && ct == CorrType::spearman) residual_spearman = cells;
        }
    }

    const auto key = key_metric_shortlist(residual_spearman, a.top_k);
    put("key_metrics", "key_metrics.csv", format_shortlist(key, residual_spearman));

    put("robustness", "table5_robustness.csv",
        format_robustness(per_budget_correlations(metrics, runs, budgets), fixed_effects_table(metrics, runs),
                          budgets));

    const auto shortlist = screening_shortlist(residual_spearman);
    if (shortlist.empty()) {
        warn("no metric passes the screening shortlist rule; screening omitted");
    } else {
        const auto screening = screening_summary(metrics, runs, shortlist, budgets);
        put("screening", "table6_screening.csv", format_screening(screening, true));
        put("screening_detail", "screening_detail.csv", format_screening(screening, false));
    }

    index["files"] = files;
    index["warnings"] = warnings;
    write_text_file(dir / "index.json", index.dump(2) + "\n");
    return kExitOk;
}

// ---------------------------------------------------------------- fixture

int cmd_fixture(const Common& c, std::size_t train_size, bool both_regimes, std::ostream& out) {
    if (c.out.empty()) throw Error("fixture needs --out <dir>");
    FixtureWorkspaceOptions opt;
    opt.seed = c.seed;
    if (train_size > 0) opt.real_train_size = train_size;
    if (both_regimes) opt.regimes = {Regime::scratch, Regime::pretrained};
    const auto ws = write_fixture_workspace(c.out, opt);
    out << ws.manifest.string() << "\n" << ws.runs.string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- verify

int cmd_verify(const std::vector<std::string>& files, std::ostream& out) {
    for (const auto& f : files) {
        const auto set = load_embeddings(f);
        out << "OK " << f << " rows=" << set.rows() << " dims=" << set.dims()
            << " encoder=" << to_string(set.encoder()) << "\n";
    }
    return kExitOk;
}

void add_common(CLI::App* sub, Common& c, bool with_out = true) {
    sub->add_option("--seed", c.seed, "Master seed");
    sub->add_option("--threads", c.threads, "Worker threads (default: SYNTHSCREEN_THREADS or all cores)");
    if (with_out) sub->add_option("--out", c.out, "Output path");
    sub->add_option("--log-level", c.log_level, "error|warn|info");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Synthetic-data screening metrics and analysis", "synthscreen"};
    app.require_subcommand(1);

    Common common;
    MetricsArgs margs;
    StatsArgs sargs;
    TableArgs targs;
    CorrelateArgs cargs;
    ReportArgs rargs;
    std::string budgets = "25,50,100";
    std::string shortlist = "auto";
    std::string runs_path;
    std::string pair;
    double level = 0.95;
    std::size_t fixture_train = 0;
    bool fixture_both = false;

    auto* metrics = app.add_subcommand("metrics", "Compute bootstrapped metrics for every manifest configuration");
    add_common(metrics, common);
    metrics->add_option("--manifest", margs.manifest)->required();
    metrics->add_option("--plan-seed", margs.plan_seed, "Bootstrap master seed (overrides --seed)");
    metrics->add_option("--trials", margs.trials)->check(CLI::PositiveNumber);
    metrics->add_option("--match-size", margs.match_size, "N or auto");
    metrics->add_option("--plan-out", margs.plan_out, "Directory for the frozen bootstrap plans");

    auto* stats_cmd = app.add_subcommand("stats", "Per-dataset object statistics");
    add_common(stats_cmd, common);
    stats_cmd->add_option("--manifest", sargs.manifest);
    stats_cmd->add_option("--labels", sargs.labels, "Label directory");
    stats_cmd->add_option("--index", sargs.index, "Label index file");
    stats_cmd->add_option("--name", sargs.name);
    stats_cmd->add_flag("--sample-std", sargs.sample_std);

    auto add_tables = [&](CLI::App* sub) {
        sub->add_option("--metrics", targs.metrics)->required();
        sub->add_option("--runs", targs.runs)->required();
    };

    auto* correlate = app.add_subcommand("correlate", "Metric-mAP correlation heatmap data");
    add_common(correlate, common);
    add_tables(correlate);
    correlate->add_option("--view", cargs.view, "raw|residual");
    correlate->add_option("--corr", cargs.corr, "pearson|spearman");
    correlate->add_option("--permutations", cargs.permutations, "Spearman permutation count (0: t approximation)");

    auto* robustness = app.add_subcommand("robustness", "Within-budget correlations and fixed-effects slopes");
    add_common(robustness, common);
    add_tables(robustness);
    robustness->add_option("--budgets", budgets);

    auto* screen = app.add_subcommand("screen", "Fixed-budget generator screening");
    add_common(screen, common);
    add_tables(screen);
    screen->add_option("--shortlist", shortlist, "auto or a file with one metric per line");
    screen->add_option("--budgets", budgets);

    auto* seedci = app.add_subcommand("seedci", "Paired seed interval for one augmented configuration");
    add_common(seedci, common);
    seedci->add_option("--runs", runs_path)->required();
    seedci->add_option("--pair", pair, "dataset:regime:baseline-vs-generator@ratio")->required();
    seedci->add_option("--level", level)->check(CLI::Range(0.5, 0.9999));

    auto* report = app.add_subcommand("report", "Write the full table bundle");
    add_common(report, common);
    add_tables(report);
    report->add_option("--manifest", rargs.manifest);
    report->add_option("--top-k", rargs.top_k);
    report->add_option("--budgets", rargs.budgets);
    report->add_option("--permutations", rargs.permutations);

    auto* fixture = app.add_subcommand("fixture", "Write a small synthetic workspace");
    add_common(fixture, common);
    fixture->add_option("--train-size", fixture_train);
    fixture->add_flag("--both-regimes", fixture_both);

    std::vector<std::string> verify_files;
    auto* verify = app.add_subcommand("verify", "Check embedding files against their sidecars");
    verify->add_option("files", verify_files, "Embedding payloads (.emb)")->required();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    Log log(err, LogLevel::warn);
    try {
        log = Log(err, parse_log_level(common.log_level));
        if (*metrics) return cmd_metrics(margs, common, out, log);
        if (*stats_cmd) return cmd_stats(sargs, common, out, log);
        if (*correlate) return cmd_correlate(targs, cargs, common, out);
        if (*robustness) return cmd_robustness(targs, budgets, common, out);
        if (*screen) return cmd_screen(targs, shortlist, budgets, common, out, log);
        if (*seedci) return cmd_seedci(runs_path, pair, level, common, out);
        if (*report) return cmd_report(targs, rargs, common, log);
        if (*fixture) return cmd_fixture(common, fixture_train, fixture_both, out);
        if (*verify) return cmd_verify(verify_files, out);
    } catch (const std::exception& e) {
        log.error(e.what());
        return kExitError;
    }
    return kExitError;
}

}  // namespace synthscreen::cli
