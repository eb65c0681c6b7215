#pragma once

// Metric-performance alignment: raw and augmentation-residualized
// correlations, Benjamini-Hochberg q-values, key-metric shortlists,
// within-budget correlations and the categorical-augmentation regression.

#include "synthscreen/dataio.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace synthscreen {

inline constexpr const char* kNoteZeroMetricVariance = "zero metric variance";
inline constexpr const char* kNoteZeroMapVariance = "zero mAP variance";
inline constexpr const char* kNoteTooFewSamples = "too few samples";
inline constexpr const char* kNoteConstantRatio = "constant augmentation ratio";

/// An undefined correlation carries no rho/p and a non-empty note.
struct Correlation {
    std::optional<double> rho;
    std::optional<double> p;
    std::string note;

    bool defined() const { return rho.has_value(); }
};

/// Sample Pearson r; p from r sqrt((n-2)/(1-r^2)) against t(n-2). `x` is the
/// metric and `y` the mAP, which only matters for the zero-variance notes.
/// p is floored at the smallest positive double so it stays in (0, 1].
Correlation pearson(std::span<const double> x, std::span<const double> y);

/// Pearson on average-tie ranks, same t approximation.
Correlation spearman(std::span<const double> x, std::span<const double> y);

/// Spearman rho with a seeded permutation p-value, (1 + #{|rho*| >= |rho|}) / (1 + permutations).
Correlation spearman_permutation(std::span<const double> x, std::span<const double> y,
                                 std::size_t permutations, std::uint64_t seed);

/// OLS residuals of v on (1, a). Residuals below 1e-12 of max|v| are set to 0
/// so that a vector affine in `a` yields an exactly constant residual.
std::vector<double> residualize(std::span<const double> a, std::span<const double> v);

/// Step-up BH q-values, same order as the input.
std::vector<double> bh_fdr(std::span<const double> p_values);

enum class View { raw, residual };
enum class CorrType { pearson, spearman };

const char* to_string(View v);
const char* to_string(CorrType c);
View parse_view(std::string_view s);
CorrType parse_corr_type(std::string_view s);

/// Per (dataset, regime, metric): aligned non-baseline observations.
struct PairedSample {
    std::string dataset;
    Regime regime = Regime::scratch;
    std::string metric;
    std::vector<std::string> generator;
    std::vector<double> a;  ///< augmentation ratio
    std::vector<double> m;  ///< metric value
    std::vector<double> y;  ///< test mAP, averaged over seeds
    std::size_t dropped = 0;
};

/// Joins metric rows with runs on the full ConfigKey. Baselines never join.
std::vector<PairedSample> join_tables(const MetricTable& metrics, const RunsTable& runs);

struct CorrCell {
    std::string dataset;
    Regime regime = Regime::scratch;
    View view = View::raw;
    CorrType corr_type = CorrType::spearman;
    std::string metric;
    std::optional<double> rho;
    std::optional<double> p;
    std::optional<double> q;
    std::size_t n = 0;
    std::string note;

    bool significant(double alpha = 0.05) const { return q && *q < alpha; }
};

struct CorrelationOptions {
    /// Spearman only: use a permutation p-value when positive.
    std::size_t permutations = 0;
    std::uint64_t seed = 0;
};

/// One cell per (dataset, regime, metric), sorted by regime, dataset, metric.
/// q-values are filled by BH over every defined cell of the same regime.
std::vector<CorrCell> correlation_matrix(const MetricTable& metrics, const RunsTable& runs, View view,
                                         CorrType corr_type, const CorrelationOptions& opt = {});

/// Top-k metrics by max over cells of |rho|, ties broken by name.
std::vector<std::string> key_metric_shortlist(std::span<const CorrCell> cells, std::size_t k = 15);

inline const std::vector<int> kDefaultBudgets{25, 50, 100};

struct BudgetCorrelations {
    std::string dataset;
    Regime regime = Regime::scratch;
    std::string metric;
    std::vector<std::pair<int, Correlation>> per_budget;
    std::optional<double> mean_rho;
    /// e.g. "25:constant; 50:constant"
    std::string notes;
};

/// Spearman across generators at each fixed budget.
std::vector<BudgetCorrelations> per_budget_correlations(const MetricTable& metrics, const RunsTable& runs,
                                                        const std::vector<int>& budgets = kDefaultBudgets);

struct FixedEffectsFit {
    double alpha = 0;
    std::map<int, double> theta;  ///< reference (lowest) level has theta 0
    double beta_fe = 0;
    double se_beta = 0;
    double t = 0;
    double p_fe = 1;
    std::size_t n = 0;
    std::size_t dof = 0;
};

/// OLS of y on level indicators (lowest level absorbed into the intercept)
/// plus the metric; two-sided t-test on the metric coefficient.
FixedEffectsFit fixed_effects(std::span<const int> levels, std::span<const double> metric,
                              std::span<const double> y);

/// Two-sided t interval for beta_fe.
std::pair<double, double> beta_interval(const FixedEffectsFit& fit, double level = 0.95);

struct FixedEffectsRow {
    std::string dataset;
    Regime regime = Regime::scratch;
    std::string metric;
    std::optional<FixedEffectsFit> fit;
    std::string note;
};

std::vector<FixedEffectsRow> fixed_effects_table(const MetricTable& metrics, const RunsTable& runs);

}  // namespace synthscreen
