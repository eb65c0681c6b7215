#pragma once

#include <span>
#include <vector>

namespace synthscreen::stats {

double mean(std::span<const double> x);
/// Sample (n-1) standard deviation; 0 for fewer than two values.
double sample_std(std::span<const double> x);

/// 1-based ranks with ties sharing their average rank.
std::vector<double> average_ranks(std::span<const double> x);

/// Student-t CDF and quantile for any positive degrees of freedom.
double t_cdf(double t, double dof);
double t_quantile(double p, double dof);
/// Two-sided p-value of a t statistic.
double t_two_sided_p(double t, double dof);

double normal_cdf(double z);

}  // namespace synthscreen::stats
