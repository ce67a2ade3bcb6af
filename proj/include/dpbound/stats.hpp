#pragma once

#include <cstddef>
#include <vector>

namespace dpbound {

/// Inverse CDF of the standard normal distribution, p in (0, 1).
/// Acklam's rational approximation refined with one Halley step against
/// std::erfc; accurate to a few ulp over the whole open interval.
double normal_quantile(double p);

/// Linear-interpolation percentile (the common "type 7" definition),
/// p in [0, 1]. `values` need not be sorted; a sorted copy is taken.
double percentile(std::vector<double> values, double p);

double mean(const std::vector<double>& values);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double sample_sd(const std::vector<double>& values);

} // namespace dpbound
