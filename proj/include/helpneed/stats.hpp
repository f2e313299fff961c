#pragma once

#include <optional>
#include <vector>

namespace helpneed {

// Inclusive linear-interpolation percentile, q in [0,1].
double percentile(std::vector<double> values, double q);
double mean(const std::vector<double>& x);
// Sample standard deviation (n-1 denominator).
double stddev(const std::vector<double>& x);

struct PearsonResult {
    double r = 0.0;
    double t = 0.0;
    double p = 1.0;
};

PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y);

struct MannWhitneyResult {
    double u = 0.0;  // U statistic of the first sample
    double z = 0.0;
    double p = 1.0;
};

// Normal approximation with tie-corrected variance, two-tailed.
MannWhitneyResult mann_whitney(const std::vector<double>& x, const std::vector<double>& y);

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
};

WelchResult welch_t(const std::vector<double>& x, const std::vector<double>& y);

// Mid-ranks (1-based) with ties averaged.
std::vector<double> ranks(const std::vector<double>& x);

}  // namespace helpneed
