#pragma once

#include <span>
#include <vector>

namespace drs::stats {

double mean(std::span<const double> v);
/// Linear-interpolated quantile (q in [0,1]) of an unsorted sample; q=0.5 is the median.
double quantile(std::span<const double> v, double q);
double median(std::span<const double> v);
/// Population standard deviation.
double stddev(std::span<const double> v);

/// 1-based ranks with ties given their average rank.
std::vector<double> average_ranks(std::span<const double> v);

/// NaN when either input has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);
double spearman(std::span<const double> a, std::span<const double> b);
double rmse(std::span<const double> a, std::span<const double> b);

}  // namespace drs::stats
