#include "synthscreen/analysis.hpp"

#include "synthscreen/random.hpp"
#include "synthscreen/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <tuple>

namespace synthscreen {

namespace {

constexpr double kTinyP = std::numeric_limits<double>::min();

void require_same_length(std::size_t a, std::size_t b, const char* op) {
    if (a != b) throw Error(std::string(op) + ": length mismatch");
}

bool is_constant(std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

std::optional<std::string> undefined_reason(std::span<const double> x, std::span<const double> y) {
    if (x.size() < 3) return std::string(kNoteTooFewSamples);
    if (is_constant(x)) return std::string(kNoteZeroMetricVariance);
    if (is_constant(y)) return std::string(kNoteZeroMapVariance);
    return std::nullopt;
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
    const double mx = stats::mean(x);
    const double my = stats::mean(y);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double t_approx_p(double r, std::size_t n) {
    if (std::abs(r) >= 1.0) return kTinyP;
    const double dof = static_cast<double>(n) - 2.0;
    const double t = r * std::sqrt(dof / (1.0 - r * r));
    return std::max(kTinyP, stats::t_two_sided_p(t, dof));
}

using GroupKey = std::tuple<Regime, std::string, std::string>;  // regime, dataset, metric

}  // namespace

Correlation pearson(std::span<const double> x, std::span<const double> y) {
    require_same_length(x.size(), y.size(), "pearson");
    if (auto why = undefined_reason(x, y)) return {std::nullopt, std::nullopt, *why};
    const double r = pearson_r(x, y);
    return {r, t_approx_p(r, x.size()), ""};
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
    require_same_length(x.size(), y.size(), "spearman");
    if (auto why = undefined_reason(x, y)) return {std::nullopt, std::nullopt, *why};
    const auto rx = stats::average_ranks(x);
    const auto ry = stats::average_ranks(y);
    const double r = pearson_r(rx, ry);
    return {r, t_approx_p(r, x.size()), ""};
}

Correlation spearman_permutation(std::span<const double> x, std::span<const double> y,
                                 std::size_t permutations, std::uint64_t seed) {
    auto c = spearman(x, y);
    if (!c.defined() || permutations == 0) return c;
    const auto rx = stats::average_ranks(x);
    auto ry = stats::average_ranks(y);
    const double observed = std::abs(*c.rho);
    Rng rng(seed);
    std::size_t extreme = 0;
    for (std::size_t k = 0; k < permutations; ++k) {
        for (std::size_t i = ry.size(); i > 1; --i) {
            std::swap(ry[i - 1], ry[static_cast<std::size_t>(rng.index(i))]);
        }
        if (std::abs(pearson_r(rx, ry)) >= observed - 1e-12) ++extreme;
    }
    c.p = static_cast<double>(1 + extreme) / static_cast<double>(1 + permutations);
    return c;
}

std::vector<double> residualize(std::span<const double> a, std::span<const double> v) {
    require_same_length(a.size(), v.size(), "residualize");
    if (a.size() < 3) throw Error("residualize: need at least 3 observations");
    if (is_constant(a)) throw Error("residualize: augmentation ratio is constant");
    const double ma = stats::mean(a);
    const double mv = stats::mean(v);
    double saa = 0, sav = 0, scale = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        saa += (a[i] - ma) * (a[i] - ma);
        sav += (a[i] - ma) * (v[i] - mv);
        scale = std::max(scale, std::abs(v[i]));
    }
    const double slope = sav / saa;
    std::vector<double> res(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        res[i] = (v[i] - mv) - slope * (a[i] - ma);
        if (std::abs(res[i]) <= 1e-12 * scale) res[i] = 0.0;
    }
    return res;
}

std::vector<double> bh_fdr(std::span<const double> p_values) {
    for (double p : p_values) {
        if (!(p > 0.0 && p <= 1.0)) throw Error("bh_fdr: p-value outside (0, 1]");
    }
    const std::size_t m = p_values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return p_values[i] < p_values[j]; });
    std::vector<double> q(m);
    double running = 1.0;
    for (std::size_t r = m; r-- > 0;) {
        const std::size_t i = order[r];
        running = std::min(running, p_values[i] * static_cast<double>(m) / static_cast<double>(r + 1));
        q[i] = std::clamp(running, p_values[i], 1.0);  // guards q >= p against rounding
    }
    return q;
}

const char* to_string(View v) { return v == View::raw ? "raw" : "residual"; }
const char* to_string(CorrType c) { return c == CorrType::pearson ? "pearson" : "spearman"; }

View parse_view(std::string_view s) {
    if (s == "raw") return View::raw;
    if (s == "residual") return View::residual;
    throw Error("unknown view '" + std::string(s) + "'");
}

CorrType parse_corr_type(std::string_view s) {
    if (s == "pearson") return CorrType::pearson;
    if (s == "spearman") return CorrType::spearman;
    throw Error("unknown correlation type '" + std::string(s) + "'");
}

std::vector<PairedSample> join_tables(const MetricTable& metrics, const RunsTable& runs) {
    std::map<ConfigKey, std::pair<double, int>> map_sum;
    for (const auto& r : runs.records) {
        if (r.key.is_baseline()) continue;
        auto& [sum, count] = map_sum[r.key];
        sum += r.map5095;
        ++count;
    }

    std::map<GroupKey, PairedSample> groups;
    std::map<GroupKey, std::set<ConfigKey>> seen_keys;
    for (const auto& rec : metrics.records) {
        if (rec.key.is_baseline()) continue;
        const GroupKey gk{rec.key.regime, rec.key.dataset, rec.metric};
        auto& g = groups[gk];
        g.dataset = rec.key.dataset;
        g.regime = rec.key.regime;
        g.metric = rec.metric;
        const auto it = map_sum.find(rec.key);
        if (it == map_sum.end()) {
            ++g.dropped;
            continue;
        }
        seen_keys[gk].insert(rec.key);
        g.generator.push_back(rec.key.generator);
        g.a.push_back(static_cast<double>(rec.key.aug_ratio));
        g.m.push_back(rec.value);
        g.y.push_back(it->second.first / it->second.second);
    }
    // Runs that exist for a (dataset, regime) but lack this metric.
    for (auto& [gk, g] : groups) {
        for (const auto& [key, unused] : map_sum) {
            if (key.regime == g.regime && key.dataset == g.dataset && !seen_keys[gk].contains(key)) {
                ++g.dropped;
            }
        }
    }
    std::vector<PairedSample> out;
    for (auto& [gk, g] : groups) out.push_back(std::move(g));
    return out;
}

std::vector<CorrCell> correlation_matrix(const MetricTable& metrics, const RunsTable& runs, View view,
                                         CorrType corr_type, const CorrelationOptions& opt) {
    const auto samples = join_tables(metrics, runs);
    const bool any = std::any_of(samples.begin(), samples.end(), [](const auto& s) { return !s.a.empty(); });
    if (!any) throw Error("correlation_matrix: empty join between metrics and runs");

    std::vector<CorrCell> cells;
    for (const auto& s : samples) {
        CorrCell cell{s.dataset, s.regime, view, corr_type, s.metric, {}, {}, {}, s.a.size(), ""};
        std::vector<double> x = s.m;
        std::vector<double> y = s.y;
        if (s.a.size() < 3) {
            cell.note = kNoteTooFewSamples;
        } else if (view == View::residual && is_constant(s.a)) {
            cell.note = kNoteConstantRatio;
        }
        if (cell.note.empty()) {
            if (view == View::residual) {
                x = residualize(s.a, s.m);
                y = residualize(s.a, s.y);
            }
            Correlation c;
            if (corr_type == CorrType::pearson) {
                c = pearson(x, y);
            } else if (opt.permutations > 0) {
                c = spearman_permutation(x, y, opt.permutations,
                                         derive_seed(opt.seed, {hash_string(s.dataset), hash_string(s.metric),
                                                                static_cast<std::uint64_t>(s.regime)}));
            } else {
                c = spearman(x, y);
            }
            cell.rho = c.rho;
            cell.p = c.p;
            cell.note = c.note;
        }
        cells.push_back(std::move(cell));
    }

    // One BH family per regime (view and correlation type are fixed here).
    for (auto regime : {Regime::scratch, Regime::pretrained}) {
        std::vector<std::size_t> idx;
        std::vector<double> ps;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (cells[i].regime == regime && cells[i].p) {
                idx.push_back(i);
                ps.push_back(*cells[i].p);
            }
        }
        const auto qs = bh_fdr(ps);
        for (std::size_t k = 0; k < idx.size(); ++k) cells[idx[k]].q = qs[k];
    }
    return cells;
}

std::vector<std::string> key_metric_shortlist(std::span<const CorrCell> cells, std::size_t k) {
    std::map<std::string, double> strength;
    for (const auto& c : cells) {
        if (!c.rho) continue;
        auto [it, inserted] = strength.try_emplace(c.metric, std::abs(*c.rho));
        if (!inserted) it->second = std::max(it->second, std::abs(*c.rho));
    }
    if (strength.empty()) throw Error("key_metric_shortlist: no defined correlation cells");
    std::vector<std::pair<std::string, double>> ranked(strength.begin(), strength.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& x, const auto& y) { return x.second > y.second; });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) out.push_back(ranked[i].first);
    return out;
}

std::vector<BudgetCorrelations> per_budget_correlations(const MetricTable& metrics, const RunsTable& runs,
                                                        const std::vector<int>& budgets) {
    const auto samples = join_tables(metrics, runs);
    for (int b : budgets) {
        const bool present = std::any_of(samples.begin(), samples.end(), [&](const auto& s) {
            return std::find(s.a.begin(), s.a.end(), static_cast<double>(b)) != s.a.end();
        });
        if (!present) throw Error("budget " + std::to_string(b) + " absent from grid");
    }

    std::vector<BudgetCorrelations> out;
    for (const auto& s : samples) {
        BudgetCorrelations row{s.dataset, s.regime, s.metric, {}, std::nullopt, ""};
        double sum = 0;
        int defined = 0;
        for (int b : budgets) {
            std::vector<double> m, y;
            for (std::size_t i = 0; i < s.a.size(); ++i) {
                if (s.a[i] == static_cast<double>(b)) {
                    m.push_back(s.m[i]);
                    y.push_back(s.y[i]);
                }
            }
            Correlation c;
            if (m.size() < 3) {
                c.note = "too few generators";
            } else if (is_constant(m)) {
                c.note = "constant";
            } else if (is_constant(y)) {
                c.note = "constant mAP";
            } else {
                c = spearman(m, y);
            }
            if (c.defined()) {
                sum += *c.rho;
                ++defined;
            } else {
                if (!row.notes.empty()) row.notes += "; ";
                row.notes += std::to_string(b) + ":" + c.note;
            }
            row.per_budget.emplace_back(b, std::move(c));
        }
        if (defined > 0) row.mean_rho = sum / defined;
        out.push_back(std::move(row));
    }
    return out;
}

FixedEffectsFit fixed_effects(std::span<const int> levels, std::span<const double> metric,
                              std::span<const double> y) {
    require_same_length(levels.size(), metric.size(), "fixed_effects");
    require_same_length(levels.size(), y.size(), "fixed_effects");
    const std::set<int> distinct(levels.begin(), levels.end());
    if (distinct.size() < 2) throw Error("fixed_effects: need at least two augmentation levels");
    const std::size_t n = levels.size();
    const std::size_t p = distinct.size() + 1;
    if (n <= p) {
        throw Error("fixed_effects: " + std::to_string(n) + " observations for " + std::to_string(p) +
                    " parameters leaves no residual degrees of freedom");
    }

    const std::vector<int> lv(distinct.begin(), distinct.end());
    Matrix x = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    Vector yy(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        x(r, 0) = 1.0;
        const auto pos = std::find(lv.begin(), lv.end(), levels[i]) - lv.begin();
        if (pos > 0) x(r, pos) = 1.0;
        x(r, static_cast<Eigen::Index>(p - 1)) = metric[i];
        yy(r) = y[i];
    }

    Eigen::ColPivHouseholderQR<Matrix> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(p)) {
        throw Error("fixed_effects: rank-deficient design, metric is collinear with the "
                    "augmentation-level indicators");
    }
    const Vector coef = qr.solve(yy);
    const Vector resid = yy - x * coef;
    const std::size_t dof = n - p;
    const double sigma2 = resid.squaredNorm() / static_cast<double>(dof);
    const Matrix xtx_inv = (x.transpose() * x).inverse();

    FixedEffectsFit fit;
    fit.alpha = coef(0);
    fit.theta[lv[0]] = 0.0;
    for (std::size_t k = 1; k < lv.size(); ++k) fit.theta[lv[k]] = coef(static_cast<Eigen::Index>(k));
    const auto last = static_cast<Eigen::Index>(p - 1);
    fit.beta_fe = coef(last);
    fit.se_beta = std::sqrt(std::max(0.0, sigma2 * xtx_inv(last, last)));
    fit.n = n;
    fit.dof = dof;
    if (fit.se_beta > 0) {
        fit.t = fit.beta_fe / fit.se_beta;
        fit.p_fe = stats::t_two_sided_p(fit.t, static_cast<double>(dof));
    } else {
        fit.t = fit.beta_fe == 0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), fit.beta_fe);
        fit.p_fe = fit.beta_fe == 0 ? 1.0 : 0.0;
    }
    return fit;
}

std::pair<double, double> beta_interval(const FixedEffectsFit& fit, double level) {
    const double t = stats::t_quantile(0.5 + level / 2.0, static_cast<double>(fit.dof));
    return {fit.beta_fe - t * fit.se_beta, fit.beta_fe + t * fit.se_beta};
}

std::vector<FixedEffectsRow> fixed_effects_table(const MetricTable& metrics, const RunsTable& runs) {
    std::vector<FixedEffectsRow> out;
    for (const auto& s : join_tables(metrics, runs)) {
        FixedEffectsRow row{s.dataset, s.regime, s.metric, std::nullopt, ""};
        std::vector<int> levels;
        for (double a : s.a) levels.push_back(static_cast<int>(a));
        try {
            row.fit = fixed_effects(levels, s.m, s.y);
        } catch (const Error& e) {
            row.note = e.what();
        }
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace synthscreen
