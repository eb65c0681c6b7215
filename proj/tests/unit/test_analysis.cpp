#include <doctest.h>

#include "synthscreen/analysis.hpp"
#include "synthscreen/stats.hpp"

#include "oracles.hpp"
#include "tables.hpp"

#include <cfloat>
#include <cmath>
#include <random>

using namespace synthscreen;
using testutil::TableBuilder;

namespace {

const std::vector<std::string> kGens{"A", "B", "C"};
const std::vector<int> kRatios{10, 25, 50, 100};

// Three generators over four ratios with a smooth mAP surface.
TableBuilder grid(const std::vector<std::string>& metrics, double (*metric_fn)(int g, int r, int which)) {
    TableBuilder t;
    for (int g = 0; g < 3; ++g) {
        for (int r : kRatios) {
            t.run(kGens[static_cast<std::size_t>(g)], r, 0.3 + 0.01 * g + 0.0004 * r + 0.001 * ((g * r) % 7));
            for (std::size_t k = 0; k < metrics.size(); ++k) {
                t.metric(kGens[static_cast<std::size_t>(g)], r, metrics[k], metric_fn(g, r, static_cast<int>(k)));
            }
        }
    }
    return t;
}

}  // namespace

TEST_SUITE("correlations") {
    TEST_CASE("pearson hand case with exact p") {
        const std::vector<double> x{1, 2, 3}, y{1, 3, 2};
        const auto c = pearson(x, y);
        REQUIRE(c.defined());
        CHECK(*c.rho == doctest::Approx(0.5).epsilon(1e-14));
        // t = 0.5 sqrt(1 / 0.75) on one dof: p = 1 - (2/pi) atan(t) = 2/3.
        CHECK(*c.p == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    }

    TEST_CASE("spearman hand case") {
        const std::vector<double> x{1, 2, 3}, y{3, 1, 2};
        CHECK(*spearman(x, y).rho == doctest::Approx(-0.5).epsilon(1e-14));
        const std::vector<double> tied{1, 1, 2, 3}, z{4, 3, 2, 1};
        CHECK(*spearman(tied, z).rho == doctest::Approx(oracle::pearson(oracle::ranks(tied), oracle::ranks(z))));
    }

    TEST_CASE("undefined cases carry notes") {
        const std::vector<double> c{2, 2, 2}, v{1, 2, 3};
        CHECK(pearson(c, v).note == kNoteZeroMetricVariance);
        CHECK(pearson(v, c).note == kNoteZeroMapVariance);
        CHECK_FALSE(spearman(c, v).defined());
        const std::vector<double> two{1, 2};
        CHECK(pearson(two, two).note == kNoteTooFewSamples);
    }

    TEST_CASE("perfect correlation keeps p positive") {
        const std::vector<double> x{1, 2, 3, 4, 5}, y{2, 4, 6, 8, 10};
        const auto c = pearson(x, y);
        CHECK(*c.rho == doctest::Approx(1.0));
        CHECK(*c.p > 0.0);
        CHECK(*c.p <= 1e-10);
    }

    TEST_CASE("pearson agrees with the oracle on random data") {
        std::mt19937_64 g(5);
        std::normal_distribution<double> nd;
        for (int t = 0; t < 50; ++t) {
            std::vector<double> x(12), y(12);
            for (std::size_t i = 0; i < x.size(); ++i) {
                x[i] = nd(g);
                y[i] = 0.5 * x[i] + nd(g);
            }
            CHECK(*pearson(x, y).rho == doctest::Approx(oracle::pearson(x, y)).epsilon(1e-12));
            const double r = *pearson(x, y).rho;
            const double tt = r * std::sqrt(10.0 / (1 - r * r));
            CHECK(*pearson(x, y).p == doctest::Approx(2 * (1 - stats::t_cdf(std::abs(tt), 10))).epsilon(1e-10));
        }
    }

    TEST_CASE("permutation p-value is seeded and bounded") {
        const std::vector<double> x{1, 2, 3, 4, 5, 6, 7}, y{1, 3, 2, 4, 6, 5, 7};
        const auto a = spearman_permutation(x, y, 999, 11);
        const auto b = spearman_permutation(x, y, 999, 11);
        CHECK(*a.p == *b.p);
        CHECK(*a.rho == doctest::Approx(*spearman(x, y).rho));
        CHECK(*a.p >= 1.0 / 1000.0);
        CHECK(*a.p < 0.05);
        const std::vector<double> noise{3, 1, 4, 1.5, 5, 9, 2};
        CHECK(*spearman_permutation(x, noise, 999, 11).p > 0.05);
    }
}

TEST_SUITE("residualize") {
    TEST_CASE("quadratic on three points") {
        const std::vector<double> a{1, 2, 3}, v{1, 4, 9};
        const auto r = residualize(a, v);
        CHECK(r[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        CHECK(r[1] == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));
        CHECK(r[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }

    TEST_CASE("affine vectors leave an exactly zero residual") {
        const std::vector<double> a{10, 25, 50, 75, 100, 10, 25};
        std::vector<double> v;
        for (double x : a) v.push_back(3.7 - 0.013 * x);
        for (double x : residualize(a, v)) CHECK(x == 0.0);
        const std::vector<double> y{0.1, 0.3, 0.2, 0.5, 0.4, 0.2, 0.1};
        const auto ra = residualize(a, a);
        CHECK(pearson(ra, residualize(a, y)).note == kNoteZeroMetricVariance);
    }

    TEST_CASE("residual correlation is invariant to affine metric changes") {
        std::mt19937_64 g(21);
        std::normal_distribution<double> nd;
        const std::vector<double> a{10, 10, 25, 25, 50, 50, 100, 100, 150};
        std::vector<double> m, y;
        for (double x : a) {
            m.push_back(nd(g) + 0.01 * x);
            y.push_back(nd(g) + 0.002 * x);
        }
        const auto ry = residualize(a, y);
        const double base = *pearson(residualize(a, m), ry).rho;
        for (double c : {0.5, 3.0, -2.0}) {
            for (double d : {-1.0, 0.0, 0.7}) {
                std::vector<double> m2;
                for (std::size_t i = 0; i < m.size(); ++i) m2.push_back(c * m[i] + d * a[i] + 4.0);
                const double rho = *pearson(residualize(a, m2), ry).rho;
                CHECK(rho == doctest::Approx(c > 0 ? base : -base).epsilon(1e-10));
            }
        }
    }

    TEST_CASE("constant augmentation is rejected") {
        const std::vector<double> a{25, 25, 25}, v{1, 2, 3};
        CHECK_THROWS(residualize(a, v));
    }
}

TEST_SUITE("bh_fdr") {
    TEST_CASE("hand cases") {
        const auto q = bh_fdr(std::vector<double>{0.01, 0.02, 0.03, 0.04});
        for (double x : q) CHECK(x == doctest::Approx(0.04).epsilon(1e-14));
        const auto q2 = bh_fdr(std::vector<double>{0.001, 0.9});
        CHECK(q2[0] == doctest::Approx(0.002).epsilon(1e-14));
        CHECK(q2[1] == doctest::Approx(0.9).epsilon(1e-14));
        CHECK(bh_fdr(std::vector<double>{0.3})[0] == 0.3);
        CHECK(bh_fdr(std::vector<double>{}).empty());
        CHECK_THROWS(bh_fdr(std::vector<double>{0.0}));
    }

    TEST_CASE("matches the definition on random inputs") {
        std::mt19937_64 g(3);
        std::uniform_real_distribution<double> u(1e-6, 1.0);
        std::uniform_int_distribution<int> size(1, 30);
        for (int t = 0; t < 100; ++t) {
            std::vector<double> p(static_cast<std::size_t>(size(g)));
            for (auto& x : p) x = u(g);
            if (p.size() > 3) p[2] = p[1];
            const auto q = bh_fdr(p);
            const auto want = oracle::bh(p);
            for (std::size_t i = 0; i < p.size(); ++i) {
                CHECK(q[i] == doctest::Approx(want[i]).epsilon(1e-14));
                CHECK(q[i] >= p[i]);
                CHECK(q[i] <= 1.0);
            }
        }
    }
}

TEST_SUITE("tables") {
    TEST_CASE("join averages seeds and ignores baselines") {
        TableBuilder t;
        t.baseline(0.3).baseline(0.32, 1);
        t.run("A", 10, 0.40, 0).run("A", 10, 0.44, 1).metric("A", 10, "fid_inception", 5.0);
        t.run("A", 25, 0.41).metric("A", 25, "fid_inception", 4.0);
        t.metric("B", 10, "fid_inception", 7.0);
        const auto samples = join_tables(t.metrics(), t.runs());
        REQUIRE(samples.size() == 1);
        CHECK(samples[0].a.size() == 2);
        CHECK(samples[0].y[0] == doctest::Approx(0.42));
        CHECK(samples[0].dropped == 1);
    }

    TEST_CASE("correlation matrix against oracles") {
        auto fn = [](int g, int r, int which) {
            return which == 0 ? 50.0 - 3.0 * g - 0.1 * r + ((g + r) % 3) : 0.2 * g + ((r * 7) % 5);
        };
        const auto t = grid({"fid_inception", "precision_dino"}, fn);
        const auto metrics = t.metrics();
        const auto runs = t.runs();
        const auto samples = join_tables(metrics, runs);
        REQUIRE(samples.size() == 2);

        const auto raw = correlation_matrix(metrics, runs, View::raw, CorrType::spearman);
        REQUIRE(raw.size() == 2);
        std::vector<double> ps;
        for (std::size_t i = 0; i < 2; ++i) {
            const auto& s = samples[i];
            CHECK(raw[i].metric == s.metric);
            CHECK(raw[i].n == 12);
            CHECK(*raw[i].rho == doctest::Approx(oracle::pearson(oracle::ranks(s.m), oracle::ranks(s.y))).epsilon(1e-12));
            ps.push_back(*raw[i].p);
        }
        const auto q = oracle::bh(ps);
        CHECK(*raw[0].q == doctest::Approx(q[0]));
        CHECK(*raw[1].q == doctest::Approx(q[1]));

        const auto res = correlation_matrix(metrics, runs, View::residual, CorrType::pearson);
        for (std::size_t i = 0; i < 2; ++i) {
            const auto& s = samples[i];
            const double want = oracle::pearson(residualize(s.a, s.m), residualize(s.a, s.y));
            CHECK(*res[i].rho == doctest::Approx(want).epsilon(1e-12));
        }
    }

    TEST_CASE("regimes form separate BH families") {
        auto fn = [](int g, int r, int) { return 10.0 - g - 0.01 * r; };
        auto t = grid({"fid_inception"}, fn);
        const auto scratch_only = correlation_matrix(t.metrics(), t.runs(), View::raw, CorrType::pearson);
        t.at("D", Regime::pretrained);
        for (int g = 0; g < 3; ++g) {
            for (int r : kRatios) {
                t.obs(kGens[static_cast<std::size_t>(g)], r, "fid_inception", g * 1.0 + r, 0.5 - 0.001 * r * g);
            }
        }
        const auto both = correlation_matrix(t.metrics(), t.runs(), View::raw, CorrType::pearson);
        REQUIRE(both.size() == 2);
        CHECK(both[0].regime == Regime::scratch);
        CHECK(*both[0].q == *scratch_only[0].q);
        CHECK(*both[1].q == *both[1].p);
    }

    TEST_CASE("empty join is an error") {
        TableBuilder t;
        t.run("A", 10, 0.4).metric("B", 10, "fid_inception", 1.0);
        CHECK_THROWS_WITH(correlation_matrix(t.metrics(), t.runs(), View::raw, CorrType::pearson),
                          doctest::Contains("empty join"));
    }

    TEST_CASE("shortlist ranks by max absolute rho with name ties") {
        std::vector<CorrCell> cells(5);
        cells[0].metric = "b";
        cells[0].rho = -0.9;
        cells[1].metric = "a";
        cells[1].rho = 0.9;
        cells[2].metric = "c";
        cells[2].rho = 0.2;
        cells[3].metric = "c";
        cells[3].rho = -0.95;
        cells[4].metric = "d";
        const auto s = key_metric_shortlist(cells, 3);
        CHECK(s == std::vector<std::string>{"c", "a", "b"});
        CHECK(key_metric_shortlist(cells, 10).size() == 3);
    }
}

TEST_SUITE("budgets") {
    TEST_CASE("constant metric at a budget is noted") {
        TableBuilder t;
        for (int g = 0; g < 4; ++g) {
            const std::string gen(1, static_cast<char>('A' + g));
            t.obs(gen, 25, "fid_inception", 1.0, 0.3 + 0.01 * g);
            t.obs(gen, 50, "fid_inception", 10.0 - g, 0.3 + 0.01 * g);
            t.obs(gen, 100, "fid_inception", static_cast<double>(g), 0.3 + 0.01 * g);
        }
        const auto rows = per_budget_correlations(t.metrics(), t.runs());
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].notes == "25:constant");
        CHECK(*rows[0].per_budget[1].second.rho == doctest::Approx(-1.0));
        CHECK(*rows[0].per_budget[2].second.rho == doctest::Approx(1.0));
        CHECK(*rows[0].mean_rho == doctest::Approx(0.0));
        CHECK_THROWS_WITH(per_budget_correlations(t.metrics(), t.runs(), {25, 75}), doctest::Contains("absent"));
    }
}

TEST_SUITE("fixed_effects") {
    std::vector<int> levels_grid(int per_level) {
        std::vector<int> levels;
        for (int r : {10, 25, 50, 75, 100, 125, 150}) {
            for (int k = 0; k < per_level; ++k) levels.push_back(r);
        }
        return levels;
    }

    TEST_CASE("noise-free data recovers the coefficients") {
        const auto levels = levels_grid(3);
        std::mt19937_64 g(1);
        std::normal_distribution<double> nd;
        std::vector<double> m, y;
        for (int l : levels) {
            m.push_back(nd(g));
            y.push_back(0.4 + 0.001 * l - 0.00002 * l * l + 0.037 * m.back());
        }
        const auto fit = fixed_effects(levels, m, y);
        CHECK(std::abs(fit.beta_fe - 0.037) <= 1e-9);
        CHECK(fit.alpha == doctest::Approx(0.4 + 0.01 - 0.002));
        CHECK(fit.theta.at(10) == 0.0);
        CHECK(fit.theta.at(150) == doctest::Approx(0.15 - 0.45 - (0.01 - 0.002)).epsilon(1e-9));
        CHECK(fit.dof == 21 - 8);
    }

    TEST_CASE("coverage of the 95% interval") {
        const auto levels = levels_grid(3);
        std::mt19937_64 g(2024);
        std::normal_distribution<double> nd;
        int covered = 0;
        const int sims = 1000;
        for (int s = 0; s < sims; ++s) {
            std::vector<double> m, y;
            for (int l : levels) {
                m.push_back(nd(g));
                y.push_back(0.3 + 0.0005 * l + 0.02 * m.back() + 0.01 * nd(g));
            }
            const auto [lo, hi] = beta_interval(fixed_effects(levels, m, y));
            if (lo <= 0.02 && 0.02 <= hi) ++covered;
        }
        const double rate = static_cast<double>(covered) / sims;
        CHECK(rate >= 0.93);
        CHECK(rate <= 0.97);
    }

    TEST_CASE("collinear metric is named") {
        const auto levels = levels_grid(2);
        std::vector<double> m, y;
        for (int l : levels) {
            m.push_back(0.5 * l);
            y.push_back(0.1 * (l % 7));
        }
        CHECK_THROWS_WITH(fixed_effects(levels, m, y), doctest::Contains("collinear"));
    }

    TEST_CASE("too few observations") {
        const std::vector<int> levels{10, 25, 50};
        const std::vector<double> m{1, 2, 3}, y{1, 2, 4};
        CHECK_THROWS_WITH(fixed_effects(levels, m, y), doctest::Contains("degrees of freedom"));
    }

    TEST_CASE("table records failures as notes") {
        TableBuilder t;
        for (int g = 0; g < 3; ++g) {
            for (int r : {10, 25, 50}) {
                const std::string gen(1, static_cast<char>('A' + g));
                t.obs(gen, r, "fid_inception", static_cast<double>(r), 0.3 + 0.01 * g + 0.001 * r);
                t.metric(gen, r, "kd_value_inception", g + 0.1 * ((g * r) % 4));
            }
        }
        const auto rows = fixed_effects_table(t.metrics(), t.runs());
        REQUIRE(rows.size() == 2);
        CHECK_FALSE(rows[0].fit.has_value());
        CHECK(rows[0].note.find("collinear") != std::string::npos);
        CHECK(rows[1].fit.has_value());
    }
}
