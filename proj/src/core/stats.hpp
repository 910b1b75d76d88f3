#pragma once

#include <span>
#include <vector>

namespace raptor::stats {

double mean(std::span<const double> xs);

/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double stddev(std::span<const double> xs);

/// Quantile with linear interpolation between order statistics
/// (h = (n - 1) q). Input need not be sorted.
double quantile(std::span<const double> xs, double q);

/// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> ranks(std::span<const double> xs);

/// Pearson correlation; NaN when undefined (fewer than 2 points or a
/// constant input).
double pearson(std::span<const double> x, std::span<const double> y);

/// Spearman rank correlation (Pearson on average ranks); NaN when undefined.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace raptor::stats
