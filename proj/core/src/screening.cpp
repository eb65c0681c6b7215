#include "synthscreen/screening.hpp"

#include "synthscreen/metric_names.hpp"
#include "synthscreen/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace synthscreen {

std::optional<double> kendall_tau(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error("kendall_tau: length mismatch");
    if (a.size() < 2) throw Error("kendall_tau: need at least two items");
    double concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double da = a[i] - a[j];
            const double db = b[i] - b[j];
            if (da == 0) ties_a += 1;
            if (db == 0) ties_b += 1;
            if (da == 0 || db == 0) continue;
            if ((da > 0) == (db > 0)) {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    const double n0 = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    const double denom = (n0 - ties_a) * (n0 - ties_b);
    if (denom <= 0) return std::nullopt;
    return (concordant - discordant) / std::sqrt(denom);
}

BudgetScreen screen_budget(const BudgetSlice& slice, Direction direction) {
    if (slice.entries.empty()) throw Error("screen_budget: empty slice");
    std::set<std::string> names;
    for (const auto& e : slice.entries) {
        if (!names.insert(e.generator).second) {
            throw Error("screen_budget: duplicate generator '" + e.generator + "'");
        }
    }
    auto score = [direction](const BudgetEntry& e) {
        return direction == Direction::lower_better ? -e.metric : e.metric;
    };
    // Argmax with ties broken by generator name; reports whether a tie occurred.
    auto argmax = [&](auto value) {
        const BudgetEntry* best = &slice.entries.front();
        for (const auto& e : slice.entries) {
            if (value(e) > value(*best) || (value(e) == value(*best) && e.generator < best->generator)) best = &e;
        }
        const auto count = std::count_if(slice.entries.begin(), slice.entries.end(),
                                         [&](const BudgetEntry& e) { return value(e) == value(*best); });
        return std::pair{best, count > 1};
    };

    const auto [picked, pick_tied] = argmax(score);
    const auto [best, best_tied] = argmax([](const BudgetEntry& e) { return e.map; });

    BudgetScreen out;
    out.budget = slice.budget;
    out.picked = picked->generator;
    out.best = best->generator;
    out.pick_tied = pick_tied;
    out.best_tied = best_tied;
    out.regret = std::max(0.0, best->map - picked->map);
    out.top1_hit = !best_tied && picked == best;
    if (slice.entries.size() >= 2) {
        std::vector<double> s, m;
        for (const auto& e : slice.entries) {
            s.push_back(score(e));
            m.push_back(e.map);
        }
        out.tau = kendall_tau(s, m);
    }
    return out;
}

Direction default_direction(const std::string& metric) {
    if (auto d = direction_of(metric)) return *d;
    throw Error("unknown metric direction for '" + metric + "'");
}

ScreeningResult screening_summary(const MetricTable& metrics, const RunsTable& runs,
                                  const std::vector<std::string>& shortlist, const std::vector<int>& budgets,
                                  const DirectionResolver& direction) {
    if (shortlist.empty()) throw Error("screening_summary: empty shortlist");
    if (budgets.empty()) throw Error("screening_summary: no budgets");
    const std::set<std::string> wanted(shortlist.begin(), shortlist.end());

    ScreeningResult result;
    for (const auto& s : join_tables(metrics, runs)) {
        if (!wanted.contains(s.metric)) continue;
        ScreeningSummary row;
        row.dataset = s.dataset;
        row.regime = s.regime;
        row.metric = s.metric;
        row.direction = direction(s.metric);
        double tau_sum = 0, regret_sum = 0;
        int tau_count = 0;
        for (int b : budgets) {
            BudgetSlice slice{s.dataset, s.regime, b, {}};
            for (std::size_t i = 0; i < s.a.size(); ++i) {
                if (s.a[i] == static_cast<double>(b)) slice.entries.push_back({s.generator[i], s.m[i], s.y[i]});
            }
            if (slice.entries.empty()) {
                throw Error("budget " + std::to_string(b) + " missing from runs for " + s.dataset + "/" +
                            to_string(s.regime) + "/" + s.metric);
            }
            auto screen = screen_budget(slice, row.direction);
            if (screen.tau) {
                tau_sum += *screen.tau;
                ++tau_count;
            }
            regret_sum += screen.regret;
            if (screen.top1_hit) ++row.top1_hits;
            row.per_budget.push_back(std::move(screen));
        }
        row.budgets = static_cast<int>(budgets.size());
        row.avg_regret = regret_sum / static_cast<double>(budgets.size());
        if (tau_count > 0) row.avg_tau = tau_sum / tau_count;
        result.rows.push_back(std::move(row));
    }

    std::map<std::pair<Regime, std::string>, std::size_t> best;
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const auto& r = result.rows[i];
        const auto key = std::pair{r.regime, r.dataset};
        auto it = best.find(key);
        if (it == best.end()) {
            best.emplace(key, i);
            continue;
        }
        const auto& cur = result.rows[it->second];
        const double tau_r = r.avg_tau.value_or(-2.0);
        const double tau_c = cur.avg_tau.value_or(-2.0);
        const bool better = r.avg_regret < cur.avg_regret ||
                            (r.avg_regret == cur.avg_regret &&
                             (tau_r > tau_c || (tau_r == tau_c && r.metric < cur.metric)));
        if (better) it->second = i;
    }
    for (const auto& [key, idx] : best) result.winners.push_back(idx);
    return result;
}

std::vector<std::string> screening_shortlist(std::span<const CorrCell> residual_cells, double q_threshold,
                                             double rho_threshold) {
    std::set<std::string> out;
    for (const auto& c : residual_cells) {
        if ((c.q && *c.q < q_threshold) || (c.rho && std::abs(*c.rho) >= rho_threshold)) out.insert(c.metric);
    }
    return {out.begin(), out.end()};
}

std::vector<BestVsBaseline> best_vs_baseline(const RunsTable& runs) {
    std::map<ConfigKey, std::pair<double, int>> per_key;
    for (const auto& r : runs.records) {
        auto& [sum, count] = per_key[r.key];
        sum += r.map5095;
        ++count;
    }
    struct Group {
        std::optional<double> baseline;
        std::optional<ConfigKey> best_key;
        double best = 0;
    };
    std::map<std::pair<Regime, std::string>, Group> groups;
    for (const auto& [key, acc] : per_key) {
        const double map = acc.first / acc.second;
        auto& g = groups[{key.regime, key.dataset}];
        if (key.is_baseline()) {
            g.baseline = map;
            continue;
        }
        const bool better = !g.best_key || map > g.best ||
                            (map == g.best && (key.generator < g.best_key->generator ||
                                               (key.generator == g.best_key->generator &&
                                                key.aug_ratio < g.best_key->aug_ratio)));
        if (better) {
            g.best = map;
            g.best_key = key;
        }
    }

    std::vector<BestVsBaseline> out;
    for (const auto& [gk, g] : groups) {
        if (!g.baseline) {
            throw Error("missing baseline for " + gk.second + "/" + to_string(gk.first));
        }
        if (!g.best_key) continue;
        if (!(*g.baseline > 0)) throw Error("baseline mAP must be positive for relative gain");
        BestVsBaseline row;
        row.dataset = gk.second;
        row.regime = gk.first;
        row.baseline = *g.baseline;
        if (g.best >= *g.baseline) {
            row.best = g.best;
            row.best_generator = g.best_key->generator;
            row.best_ratio = g.best_key->aug_ratio;
        } else {
            // No augmented configuration reaches the baseline.
            row.best = *g.baseline;
            row.best_generator = kBaselineGenerator;
            row.best_ratio = kBaselineRatio;
        }
        row.delta = row.best - *g.baseline;
        row.delta_pct = 100.0 * row.delta / *g.baseline;
        out.push_back(std::move(row));
    }
    return out;
}

SeedCi seed_ci(std::span<const double> baseline_maps, std::span<const double> augmented_maps, double level) {
    if (baseline_maps.size() != augmented_maps.size()) throw Error("seed_ci: mismatched lengths");
    if (baseline_maps.size() < 2) throw Error("seed_ci: need at least two seeds");
    std::vector<double> delta(baseline_maps.size());
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = augmented_maps[i] - baseline_maps[i];
    SeedCi out;
    out.delta_mean = stats::mean(delta);
    out.delta_std = stats::sample_std(delta);
    out.t_crit = stats::t_quantile(0.5 + level / 2.0, static_cast<double>(delta.size() - 1));
    const double half = out.t_crit * out.delta_std / std::sqrt(static_cast<double>(delta.size()));
    out.ci_low = out.delta_mean - half;
    out.ci_high = out.delta_mean + half;
    return out;
}

std::string format_signed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%+.*f", decimals, v);
    std::string s(buf);
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.front() = '+';
    return s;
}

}  // namespace synthscreen
