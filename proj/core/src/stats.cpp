#include "synthscreen/stats.hpp"

#include "synthscreen/common.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace synthscreen::stats {

double mean(std::span<const double> x) {
    if (x.empty()) throw Error("mean of empty sample");
    double s = 0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double sample_std(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double ss = 0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

std::vector<double> average_ranks(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && x[order[j]] == x[order[i]]) ++j;
        const double r = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
        i = j;
    }
    return ranks;
}

double t_cdf(double t, double dof) {
    if (!(dof > 0)) throw Error("t distribution needs positive degrees of freedom");
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    return boost::math::cdf(boost::math::students_t_distribution<double>(dof), t);
}

double t_quantile(double p, double dof) {
    if (!(dof > 0)) throw Error("t distribution needs positive degrees of freedom");
    if (!(p > 0 && p < 1)) throw Error("t quantile needs p in (0, 1)");
    return boost::math::quantile(boost::math::students_t_distribution<double>(dof), p);
}

double t_two_sided_p(double t, double dof) {
    if (!(dof > 0)) throw Error("t distribution needs positive degrees of freedom");
    if (std::isinf(t)) return 0.0;
    return 2.0 * boost::math::cdf(boost::math::complement(
                     boost::math::students_t_distribution<double>(dof), std::abs(t)));
}

double normal_cdf(double z) {
    return boost::math::cdf(boost::math::normal_distribution<double>(), z);
}

}  // namespace synthscreen::stats
