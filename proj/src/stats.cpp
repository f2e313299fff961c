#include "helpneed/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "helpneed/errors.hpp"

namespace helpneed {

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw InsufficientData("percentile of empty sample");
    std::sort(values.begin(), values.end());
    double pos = q * static_cast<double>(values.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, values.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double mean(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    double m = mean(x), ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

namespace {

double two_tailed_t(double t, double df) {
    if (std::isinf(t)) return 0.0;
    boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

double two_tailed_z(double z) {
    boost::math::normal dist;
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(z)));
}

}  // namespace

PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw Error("pearson: samples differ in length");
    if (x.size() < 3) throw InsufficientData("pearson needs at least 3 pairs");
    double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw ZeroVariance("pearson: a sample has zero variance");
    PearsonResult res;
    res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    double n2 = static_cast<double>(x.size() - 2);
    double denom = 1.0 - res.r * res.r;
    if (denom <= 0.0) {
        res.t = std::copysign(INFINITY, res.r);
        res.p = 0.0;
    } else {
        res.t = res.r * std::sqrt(n2 / denom);
        res.p = two_tailed_t(res.t, n2);
    }
    return res;
}

std::vector<double> ranks(const std::vector<double>& x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
        i = j + 1;
    }
    return r;
}

MannWhitneyResult mann_whitney(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.empty() || y.empty()) throw InsufficientData("mann_whitney needs two non-empty samples");
    std::vector<double> all(x);
    all.insert(all.end(), y.begin(), y.end());
    auto r = ranks(all);
    const double n1 = static_cast<double>(x.size()), n2 = static_cast<double>(y.size());
    double r1 = std::accumulate(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(x.size()), 0.0);
    MannWhitneyResult res;
    res.u = r1 - n1 * (n1 + 1.0) / 2.0;

    std::vector<double> sorted(all);
    std::sort(sorted.begin(), sorted.end());
    double tie_sum = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        double t = static_cast<double>(j - i);
        tie_sum += t * t * t - t;
        i = j;
    }
    const double n = n1 + n2;
    double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_sum / (n * (n - 1.0)));
    double mu = n1 * n2 / 2.0;
    if (var <= 0.0) {
        res.z = 0.0;
        res.p = 1.0;
        return res;
    }
    res.z = (res.u - mu) / std::sqrt(var);
    res.p = two_tailed_z(res.z);
    return res;
}

WelchResult welch_t(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() < 2 || y.size() < 2) throw InsufficientData("welch_t needs at least 2 values per sample");
    const double n1 = static_cast<double>(x.size()), n2 = static_cast<double>(y.size());
    double v1 = std::pow(stddev(x), 2) / n1, v2 = std::pow(stddev(y), 2) / n2;
    double diff = mean(x) - mean(y);
    WelchResult res;
    double se2 = v1 + v2;
    if (se2 == 0.0) {
        res.df = n1 + n2 - 2.0;
        res.t = diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
        res.p = diff == 0.0 ? 1.0 : 0.0;
        return res;
    }
    res.t = diff / std::sqrt(se2);
    res.df = se2 * se2 / (v1 * v1 / (n1 - 1.0) + v2 * v2 / (n2 - 1.0));
    res.p = two_tailed_t(res.t, res.df);
    return res;
}

}  // namespace helpneed
