#include <doctest.h>

#include "synthscreen/screening.hpp"

#include "oracles.hpp"
#include "tables.hpp"

#include <cmath>
#include <random>

using namespace synthscreen;
using testutil::TableBuilder;

namespace {

// mAP grows with generator quality q; `metric(q, r)` gives each metric value.
template <class F>
TableBuilder screening_grid(const std::vector<std::string>& names, F metric) {
    TableBuilder t;
    t.baseline(0.30);
    const std::vector<std::string> gens{"G1", "G2", "G3", "G4"};
    for (std::size_t g = 0; g < gens.size(); ++g) {
        const double q = static_cast<double>(g);
        for (int r : {10, 25, 50, 75, 100, 125, 150}) {
            t.run(gens[g], r, 0.30 + 0.01 * q + 0.0001 * r);
            for (const auto& n : names) t.metric(gens[g], r, n, metric(n, q, r));
        }
    }
    return t;
}

}  // namespace

TEST_SUITE("kendall_tau") {
    TEST_CASE("hand cases") {
        const std::vector<double> a{1, 2, 3};
        CHECK(*kendall_tau(a, std::vector<double>{1, 2, 3}) == doctest::Approx(1.0));
        CHECK(*kendall_tau(a, std::vector<double>{3, 2, 1}) == doctest::Approx(-1.0));
        CHECK(*kendall_tau(a, std::vector<double>{1, 3, 2}) == doctest::Approx(1.0 / 3.0));
        // One tie on the left: two concordant pairs over sqrt(2 * 3).
        CHECK(*kendall_tau(std::vector<double>{1, 1, 2}, a) == doctest::Approx(2.0 / std::sqrt(6.0)));
        CHECK_FALSE(kendall_tau(std::vector<double>{4, 4, 4}, a).has_value());
        CHECK_THROWS(kendall_tau(std::vector<double>{1}, std::vector<double>{1}));
    }

    TEST_CASE("tau-b oracle on 200 small instances") {
        std::mt19937_64 g(77);
        std::uniform_int_distribution<int> size(2, 8), val(0, 4);
        int defined = 0;
        for (int t = 0; t < 200; ++t) {
            const auto n = static_cast<std::size_t>(size(g));
            std::vector<double> a(n), b(n);
            for (auto& x : a) x = val(g);
            for (auto& x : b) x = val(g);
            const auto got = kendall_tau(a, b);
            const double want = oracle::kendall_tau_b(a, b);
            if (std::isnan(want)) {
                CHECK_FALSE(got.has_value());
            } else {
                REQUIRE(got.has_value());
                CHECK(std::abs(*got - want) <= 1e-12);
                ++defined;
            }
        }
        CHECK(defined > 150);
    }
}

TEST_SUITE("screen_budget") {
    TEST_CASE("pick, regret and ties") {
        BudgetSlice s{"D", Regime::scratch, 50, {{"A", 3.0, 0.40}, {"B", 1.0, 0.35}, {"C", 2.0, 0.45}}};
        const auto lower = screen_budget(s, Direction::lower_better);
        CHECK(lower.picked == "B");
        CHECK(lower.best == "C");
        CHECK_FALSE(lower.top1_hit);
        CHECK(lower.regret == doctest::Approx(0.10));

        const auto higher = screen_budget(s, Direction::higher_better);
        CHECK(higher.picked == "A");
        CHECK(higher.regret == doctest::Approx(0.05));

        s.entries[1].metric = 3.0;
        const auto tied = screen_budget(s, Direction::higher_better);
        CHECK(tied.picked == "A");
        CHECK(tied.pick_tied);

        // A tie for the best mAP never counts as a Top-1 hit.
        BudgetSlice t{"D", Regime::scratch, 50, {{"A", 1.0, 0.4}, {"B", 2.0, 0.4}}};
        const auto r = screen_budget(t, Direction::lower_better);
        CHECK(r.best_tied);
        CHECK_FALSE(r.top1_hit);
        CHECK(r.regret == 0.0);
        CHECK_FALSE(r.tau.has_value());
    }

    TEST_CASE("duplicate generators are rejected") {
        BudgetSlice s{"D", Regime::scratch, 25, {{"A", 1, 0.1}, {"A", 2, 0.2}}};
        CHECK_THROWS(screen_budget(s, Direction::lower_better));
    }
}

TEST_SUITE("screening_summary") {
    TEST_CASE("oracle and anti-oracle metrics") {
        const auto t = screening_grid({"fid_inception", "kd_value_dino", "precision_dino"},
                                      [](const std::string& n, double q, int r) {
                                          if (n == "fid_inception") return 40.0 - 5.0 * q + 0.01 * r;
                                          if (n == "kd_value_dino") return 1.0 + q;  // anti-oracle
                                          return 0.5 + 0.1 * q;
                                      });
        const auto res = screening_summary(t.metrics(), t.runs(), {"fid_inception", "kd_value_dino", "precision_dino"});
        REQUIRE(res.rows.size() == 3);
        const auto& fid = res.rows[0];
        CHECK(fid.metric == "fid_inception");
        CHECK(fid.direction == Direction::lower_better);
        CHECK(*fid.avg_tau == doctest::Approx(1.0));
        CHECK(fid.top1() == "3/3");
        CHECK(fid.avg_regret == 0.0);

        const auto& kd = res.rows[1];
        CHECK(*kd.avg_tau == doctest::Approx(-1.0));
        CHECK(kd.top1() == "0/3");
        CHECK(kd.avg_regret == doctest::Approx(0.03));
        for (const auto& b : kd.per_budget) CHECK(b.picked == "G1");

        const auto& prec = res.rows[2];
        CHECK(prec.direction == Direction::higher_better);
        CHECK(prec.top1() == "3/3");

        // fid and precision tie on regret and tau; the name decides.
        REQUIRE(res.winners.size() == 1);
        CHECK(res.rows[res.winners[0]].metric == "fid_inception");
    }

    TEST_CASE("errors") {
        const auto t = screening_grid({"fid_inception"}, [](const std::string&, double q, int) { return q; });
        CHECK_THROWS(screening_summary(t.metrics(), t.runs(), {}));
        CHECK_THROWS_WITH(screening_summary(t.metrics(), t.runs(), {"fid_inception"}, {25, 30}),
                          doctest::Contains("missing"));
        TableBuilder u;
        u.obs("A", 25, "mystery", 1.0, 0.3).obs("A", 50, "mystery", 1.0, 0.3);
        CHECK_THROWS_WITH(screening_summary(u.metrics(), u.runs(), {"mystery"}, {25}),
                          doctest::Contains("unknown metric direction"));
    }

    TEST_CASE("shortlist rule") {
        std::vector<CorrCell> cells(4);
        cells[0].metric = "a";
        cells[0].rho = 0.1;
        cells[0].q = 0.01;
        cells[1].metric = "b";
        cells[1].rho = -0.35;
        cells[1].q = 0.5;
        cells[2].metric = "c";
        cells[2].rho = 0.34;
        cells[2].q = 0.05;
        cells[3].metric = "d";
        CHECK(screening_shortlist(cells) == std::vector<std::string>{"a", "b"});
    }
}

TEST_SUITE("best_vs_baseline") {
    TEST_CASE("published rows") {
        TableBuilder t("Pedestrian");
        t.baseline(0.4562).run("DiffusionGAN", 75, 0.4910).run("ADM", 25, 0.4700);
        t.at("TrafficSigns", Regime::scratch).baseline(0.1599).run("GLIDE", 100, 0.2088);
        const auto rows = best_vs_baseline(t.runs());
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].dataset == "Pedestrian");
        CHECK(format_signed(rows[0].delta, 4) == "+0.0348");
        CHECK(format_signed(rows[0].delta_pct, 1) == "+7.6");
        CHECK(rows[0].best_label() == "DiffusionGAN@75%");
        CHECK(rows[0].delta_pct == doctest::Approx(100.0 * (0.4910 - 0.4562) / 0.4562).epsilon(1e-15));
        CHECK(format_signed(rows[1].delta_pct, 1) == "+30.6");
    }

    TEST_CASE("nothing beats the baseline") {
        TableBuilder t;
        t.baseline(0.5).run("A", 10, 0.45).run("B", 25, 0.49);
        const auto rows = best_vs_baseline(t.runs());
        REQUIRE(rows.size() == 1);
        CHECK(format_signed(rows[0].delta, 4) == "+0.0000");
        CHECK(format_signed(rows[0].delta_pct, 1) == "+0.0");
        CHECK(rows[0].best_label() == "baseline");
    }

    TEST_CASE("ties break by generator then lower ratio, seeds averaged") {
        TableBuilder t;
        t.baseline(0.3).run("B", 10, 0.4).run("A", 50, 0.4).run("A", 25, 0.38, 0).run("A", 25, 0.42, 1);
        const auto rows = best_vs_baseline(t.runs());
        CHECK(rows[0].best_label() == "A@25%");
    }

    TEST_CASE("missing baseline") {
        TableBuilder t;
        t.run("A", 10, 0.4);
        CHECK_THROWS_WITH(best_vs_baseline(t.runs()), doctest::Contains("missing baseline"));
    }
}

TEST_SUITE("seed_ci") {
    TEST_CASE("three-seed interval") {
        const std::vector<double> base{0.40, 0.41, 0.42};
        const std::vector<double> aug{0.4122, 0.4231, 0.4339};
        const auto ci = seed_ci(base, aug);
        CHECK(ci.t_crit == doctest::Approx(0.95 / std::sqrt(2 * 0.975 * 0.025)).epsilon(1e-12));
        CHECK(ci.delta_mean == doctest::Approx(0.0392 / 3.0).epsilon(1e-12));
        char buf[64];
        std::snprintf(buf, sizeof buf, "[%.4f %.4f]", ci.ci_low, ci.ci_high);
        CHECK(std::string(buf) == "[0.0110 0.0152]");
        CHECK_FALSE(ci.overlaps_zero());
    }

    TEST_CASE("identical inputs collapse to zero") {
        const std::vector<double> v{0.3, 0.31, 0.29};
        const auto ci = seed_ci(v, v);
        CHECK(ci.ci_low == 0.0);
        CHECK(ci.ci_high == 0.0);
        CHECK(ci.overlaps_zero());
    }

    TEST_CASE("noisy deltas overlap zero") {
        const std::vector<double> base{0.40, 0.40, 0.40}, aug{0.41, 0.39, 0.402};
        CHECK(seed_ci(base, aug).overlaps_zero());
    }

    TEST_CASE("contract") {
        const std::vector<double> one{0.3};
        CHECK_THROWS(seed_ci(one, one));
        CHECK_THROWS(seed_ci(std::vector<double>{0.1, 0.2}, std::vector<double>{0.1, 0.2, 0.3}));
    }
}

TEST_SUITE("format_signed") {
    TEST_CASE("no negative zero") {
        CHECK(format_signed(-0.00001, 3) == "+0.000");
        CHECK(format_signed(-0.0, 1) == "+0.0");
        CHECK(format_signed(-0.25, 2) == "-0.25");
        CHECK(format_signed(0.0348, 4) == "+0.0348");
    }
}
