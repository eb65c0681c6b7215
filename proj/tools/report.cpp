#include "report.hpp"

#include "synthscreen/metric_names.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace synthscreen::cli {

namespace {

std::string opt_fixed(const std::optional<double>& v, int decimals) {
    return v ? fixed(*v, decimals) : std::string("NA");
}

std::string opt_signed(const std::optional<double>& v, int decimals) {
    return v ? format_signed(*v, decimals) : std::string("NA");
}

std::string arrow(Direction d) { return d == Direction::lower_better ? "down" : "up"; }

}  // namespace

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s(buf);
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

std::string format_p(double p) { return p < 0.001 ? std::string("<0.001") : fixed(p, 3); }

std::string format_heatmap(const std::vector<CorrCell>& cells) {
    // Row order within a regime: decreasing max |rho| over datasets, then name.
    std::map<std::pair<Regime, std::string>, double> strength;
    for (const auto& c : cells) {
        auto& s = strength[{c.regime, c.metric}];
        if (c.rho) s = std::max(s, std::abs(*c.rho));
    }
    std::map<std::pair<Regime, std::string>, int> order;
    for (auto regime : {Regime::scratch, Regime::pretrained}) {
        std::vector<std::pair<double, std::string>> ranked;
        for (const auto& [key, s] : strength) {
            if (key.first == regime) ranked.emplace_back(-s, key.second);
        }
        std::sort(ranked.begin(), ranked.end());
        for (std::size_t i = 0; i < ranked.size(); ++i) order[{regime, ranked[i].second}] = static_cast<int>(i + 1);
    }

    std::string out = "regime,dataset,view,corr,metric,row_order,rho,p,q,n,significant,note\n";
    for (const auto& c : cells) {
        out += std::string(to_string(c.regime)) + "," + c.dataset + "," + to_string(c.view) + "," +
               to_string(c.corr_type) + "," + c.metric + "," + std::to_string(order[{c.regime, c.metric}]) + "," +
               opt_signed(c.rho, 4) + "," + (c.p ? fixed(*c.p, 6) : "NA") + "," +
               (c.q ? fixed(*c.q, 6) : "NA") + "," + std::to_string(c.n) + "," +
               (c.significant() ? "*" : "") + "," + c.note + "\n";
    }
    return out;
}

std::string format_regime_stats(const std::vector<std::pair<std::string, RegimeStats>>& rows) {
    std::string out =
        "dataset,images,boxes,inst_per_img_mean,inst_per_img_std,pct_small,mean_area_mean,mean_area_std,"
        "mean_iou_mean,mean_iou_std\n";
    for (const auto& [name, s] : rows) {
        out += name + "," + std::to_string(s.images) + "," + std::to_string(s.boxes) + "," +
               fixed(s.inst_per_img.mean, 2) + "," + fixed(s.inst_per_img.std, 2) + "," + fixed(s.pct_small, 2) +
               "," + fixed(s.mean_area.mean, 3) + "," + fixed(s.mean_area.std, 3) + "," +
               fixed(s.mean_iou.mean, 3) + "," + fixed(s.mean_iou.std, 3) + "\n";
    }
    return out;
}

std::string format_best_vs_baseline(const std::vector<BestVsBaseline>& rows) {
    std::string out = "dataset,regime,baseline,best,delta,delta_pct,best_gen_at_aug\n";
    for (const auto& r : rows) {
        out += r.dataset + "," + to_string(r.regime) + "," + fixed(r.baseline, 4) + "," + fixed(r.best, 4) + "," +
               format_signed(r.delta, 4) + "," + format_signed(r.delta_pct, 1) + "%," + r.best_label() + "\n";
    }
    return out;
}

std::string format_robustness(const std::vector<BudgetCorrelations>& budget_rows,
                              const std::vector<FixedEffectsRow>& fe_rows, const std::vector<int>& budgets) {
    std::map<std::tuple<Regime, std::string, std::string>, const FixedEffectsRow*> fe;
    for (const auto& r : fe_rows) fe[{r.regime, r.dataset, r.metric}] = &r;

    std::string out = "regime,dataset,metric,direction";
    for (int b : budgets) out += ",rho_" + std::to_string(b);
    out += ",rho_mean,beta_fe,p_fe,notes\n";
    for (const auto& r : budget_rows) {
        const auto dir = direction_of(r.metric);
        out += std::string(to_string(r.regime)) + "," + r.dataset + "," + r.metric + "," +
               (dir ? arrow(*dir) : "") ;
        for (const auto& [b, c] : r.per_budget) out += "," + opt_signed(c.rho, 3);
        out += "," + opt_signed(r.mean_rho, 3);
        std::string notes = r.notes;
        const auto it = fe.find({r.regime, r.dataset, r.metric});
        if (it != fe.end() && it->second->fit) {
            out += "," + format_signed(it->second->fit->beta_fe, 3) + "," + format_p(it->second->fit->p_fe);
        } else {
            out += ",NA,NA";
            if (it != fe.end() && !it->second->note.empty()) {
                if (!notes.empty()) notes += "; ";
                notes += "fe:" + it->second->note;
            }
        }
        // Notes may contain commas from error text; keep the column parseable.
        for (auto& ch : notes) {
            if (ch == ',') ch = ';';
        }
        out += "," + notes + "\n";
    }
    return out;
}

std::string format_screening(const ScreeningResult& result, bool winners_only) {
    const std::set<std::size_t> winners(result.winners.begin(), result.winners.end());
    std::string out = "regime,dataset,metric,direction,avg_tau,top1,avg_regret,winner,picks\n";
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        if (winners_only && !winners.contains(i)) continue;
        const auto& r = result.rows[i];
        std::string picks;
        for (const auto& b : r.per_budget) {
            if (!picks.empty()) picks += ";";
            picks += std::to_string(b.budget) + ":" + b.picked + (b.pick_tied ? "(tie)" : "") +
                     (b.best_tied ? "(best-tie)" : "");
        }
        out += std::string(to_string(r.regime)) + "," + r.dataset + "," + r.metric + "," + arrow(r.direction) +
               "," + opt_fixed(r.avg_tau, 3) + "," + r.top1() + "," + fixed(r.avg_regret, 4) + "," +
               (winners.contains(i) ? "yes" : "") + "," + picks + "\n";
    }
    return out;
}

std::string format_shortlist(const std::vector<std::string>& metrics, const std::vector<CorrCell>& cells) {
    std::string out = "rank,metric,max_abs_rho\n";
    for (std::size_t i = 0; i < metrics.size(); ++i) {
        double s = 0;
        for (const auto& c : cells) {
            if (c.metric == metrics[i] && c.rho) s = std::max(s, std::abs(*c.rho));
        }
        out += std::to_string(i + 1) + "," + metrics[i] + "," + fixed(s, 4) + "\n";
    }
    return out;
}

std::string format_seed_ci(const SeedCiReport& r) {
    std::string out = "dataset,regime,item,value\n";
    const std::string prefix = r.dataset + "," + to_string(r.regime) + ",";
    out += prefix + "Base mAP," + fixed(r.base_mean, 4) + "±" + fixed(r.base_std, 4) + "\n";
    out += prefix + r.augmented_label + "," + fixed(r.aug_mean, 4) + "±" + fixed(r.aug_std, 4) + "\n";
    out += prefix + "Delta (Aug-Base)," + format_signed(r.ci.delta_mean, 4) + "±" + fixed(r.ci.delta_std, 4) + "\n";
    out += prefix + "CI95 on Delta,[" + fixed(r.ci.ci_low, 4) + " " + fixed(r.ci.ci_high, 4) + "]\n";
    out += prefix + "separable," +
           (r.ci.overlaps_zero() ? "no (not separable from seed variation)" : "yes") + "\n";
    return out;
}

}  // namespace synthscreen::cli
