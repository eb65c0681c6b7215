#pragma once

// Fixed-budget generator screening (Kendall tau, Top-1, regret), the
// best-vs-baseline summary and paired seed-robustness intervals.

#include "synthscreen/analysis.hpp"
#include "synthscreen/common.hpp"
#include "synthscreen/dataio.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace synthscreen {

/// Tie-corrected Kendall tau-b; nullopt when either side is entirely tied.
std::optional<double> kendall_tau(std::span<const double> a, std::span<const double> b);

struct BudgetEntry {
    std::string generator;
    double metric = 0;
    double map = 0;
};

struct BudgetSlice {
    std::string dataset;
    Regime regime = Regime::scratch;
    int budget = 0;
    std::vector<BudgetEntry> entries;
};

struct BudgetScreen {
    int budget = 0;
    std::optional<double> tau;
    bool top1_hit = false;
    double regret = 0;
    std::string picked;
    std::string best;
    bool pick_tied = false;  ///< several generators share the best metric value
    bool best_tied = false;  ///< several generators share the best mAP
};

/// Picks the metric-best generator under `direction` (ties by name) and scores
/// the pick against the mAP ordering.
BudgetScreen screen_budget(const BudgetSlice& slice, Direction direction);

struct ScreeningSummary {
    std::string dataset;
    Regime regime = Regime::scratch;
    std::string metric;
    Direction direction = Direction::lower_better;
    std::optional<double> avg_tau;
    int top1_hits = 0;
    int budgets = 0;
    double avg_regret = 0;
    std::vector<BudgetScreen> per_budget;

    std::string top1() const { return std::to_string(top1_hits) + "/" + std::to_string(budgets); }
};

struct ScreeningResult {
    std::vector<ScreeningSummary> rows;
    /// Index into `rows` of each (dataset, regime) winner: lowest avg regret,
    /// then higher avg tau, then metric name.
    std::vector<std::size_t> winners;
};

using DirectionResolver = std::function<Direction(const std::string& metric)>;

/// Resolves through direction_of(column) and throws for unknown names.
Direction default_direction(const std::string& metric);

ScreeningResult screening_summary(const MetricTable& metrics, const RunsTable& runs,
                                  const std::vector<std::string>& shortlist,
                                  const std::vector<int>& budgets = kDefaultBudgets,
                                  const DirectionResolver& direction = default_direction);

/// Metrics with q < q_threshold in any cell or max |rho| >= rho_threshold.
std::vector<std::string> screening_shortlist(std::span<const CorrCell> residual_cells,
                                             double q_threshold = 0.05, double rho_threshold = 0.35);

struct BestVsBaseline {
    std::string dataset;
    Regime regime = Regime::scratch;
    double baseline = 0;
    double best = 0;
    double delta = 0;
    double delta_pct = 0;
    std::string best_generator;
    int best_ratio = 0;

    /// "generator@ratio%", or "baseline" when nothing beats the real-only run.
    std::string best_label() const {
        if (best_generator == kBaselineGenerator) return best_generator;
        return best_generator + "@" + std::to_string(best_ratio) + "%";
    }
};

/// Per (dataset, regime); seeds are averaged per configuration first. When every
/// augmented configuration is below the baseline the baseline itself is reported.
/// Throws when a (dataset, regime) with augmented runs has no baseline.
std::vector<BestVsBaseline> best_vs_baseline(const RunsTable& runs);

struct SeedCi {
    double delta_mean = 0;
    double delta_std = 0;
    double ci_low = 0;
    double ci_high = 0;
    double t_crit = 0;

    /// True when the interval contains 0.
    bool overlaps_zero() const { return ci_low <= 0.0 && ci_high >= 0.0; }
};

/// Paired per-seed deltas (augmented - baseline), Student-t interval with n-1 dof.
SeedCi seed_ci(std::span<const double> baseline_maps, std::span<const double> augmented_maps,
               double level = 0.95);

/// Signed fixed-precision formatting that never prints "-0.000...".
std::string format_signed(double v, int decimals);

}  // namespace synthscreen
