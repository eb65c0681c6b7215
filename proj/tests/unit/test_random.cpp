#include <doctest.h>

#include "synthscreen/random.hpp"
#include "synthscreen/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>

using namespace synthscreen;

TEST_CASE("equal seeds give equal streams") {
    Rng a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        CHECK(x == b.next());
        differs = differs || x != c.next();
    }
    CHECK(differs);
}

TEST_CASE("derive_seed is order sensitive") {
    CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
    CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
    CHECK(hash_string("Alpha") != hash_string("alpha"));
    CHECK(hash_string("") == 0xcbf29ce484222325ULL);
}

TEST_CASE("uniform stays in [0, 1) and index in range") {
    Rng r(5);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(r.index(7) < 7);
    }
}

TEST_CASE("normal draws have unit moments") {
    Rng r(11);
    std::vector<double> v(20000);
    for (auto& x : v) x = r.normal();
    CHECK(std::abs(stats::mean(v)) < 0.03);
    CHECK(std::abs(stats::sample_std(v) - 1.0) < 0.03);
}

TEST_CASE("sampling contracts") {
    Rng r(3);
    const auto wo = r.sample_without_replacement(50, 20);
    CHECK(wo.size() == 20);
    CHECK(std::set<std::size_t>(wo.begin(), wo.end()).size() == 20);
    CHECK(*std::max_element(wo.begin(), wo.end()) < 50);
    CHECK_THROWS(r.sample_without_replacement(5, 6));

    const auto w = r.sample_with_replacement(3, 30);
    CHECK(w.size() == 30);
    CHECK(std::set<std::size_t>(w.begin(), w.end()).size() <= 3);

    auto p = r.permutation(10);
    std::sort(p.begin(), p.end());
    for (std::size_t i = 0; i < 10; ++i) CHECK(p[i] == i);
}

TEST_CASE("average ranks share ties") {
    const std::vector<double> x{3, 1, 3, 2};
    const auto r = stats::average_ranks(x);
    CHECK(r == std::vector<double>{3.5, 1, 3.5, 2});
}

TEST_CASE("t distribution reference values") {
    // Two degrees of freedom have the closed form (2p - 1) / sqrt(2p(1 - p)).
    const double p = 0.975;
    CHECK(stats::t_quantile(p, 2) == doctest::Approx((2 * p - 1) / std::sqrt(2 * p * (1 - p))).epsilon(1e-12));
    CHECK(stats::t_quantile(p, 2) == doctest::Approx(4.303).epsilon(1e-4));
    CHECK(stats::t_quantile(p, 30) == doctest::Approx(2.0423).epsilon(1e-4));
    CHECK(stats::t_cdf(stats::t_quantile(p, 30), 30) == doctest::Approx(p).epsilon(1e-13));
    CHECK(stats::t_cdf(0.0, 5) == doctest::Approx(0.5));
    CHECK(stats::t_two_sided_p(0.0, 5) == doctest::Approx(1.0));
    // t with one degree of freedom is Cauchy: P(|T| > 1) = 1/2.
    CHECK(stats::t_two_sided_p(1.0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(stats::normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
}
