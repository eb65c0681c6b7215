#pragma once

// Delimited-text renderings of the analysis outputs. Column layouts follow the
// published table structures; every file is plot- or typeset-ready.

#include "synthscreen/analysis.hpp"
#include "synthscreen/object_metrics.hpp"
#include "synthscreen/screening.hpp"

#include <string>
#include <utility>
#include <vector>

namespace synthscreen::cli {

std::string fixed(double v, int decimals);

/// "<0.001" below one thousandth, otherwise three decimals.
std::string format_p(double p);

std::string format_heatmap(const std::vector<CorrCell>& cells);
std::string format_regime_stats(const std::vector<std::pair<std::string, RegimeStats>>& rows);
std::string format_best_vs_baseline(const std::vector<BestVsBaseline>& rows);
std::string format_robustness(const std::vector<BudgetCorrelations>& budget_rows,
                              const std::vector<FixedEffectsRow>& fe_rows, const std::vector<int>& budgets);
std::string format_screening(const ScreeningResult& result, bool winners_only);
std::string format_shortlist(const std::vector<std::string>& metrics, const std::vector<CorrCell>& cells);

struct SeedCiReport {
    std::string dataset;
    Regime regime = Regime::scratch;
    std::string augmented_label;
    double base_mean = 0, base_std = 0;
    double aug_mean = 0, aug_std = 0;
    SeedCi ci;
};

std::string format_seed_ci(const SeedCiReport& r);

}  // namespace synthscreen::cli
