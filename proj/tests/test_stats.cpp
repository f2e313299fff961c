#include <doctest.h>

#include <cmath>
#include <numeric>

#include "helpneed/errors.hpp"
#include "helpneed/stats.hpp"

using namespace helpneed;

namespace {

const std::vector<double> kX{2.1, 3.4, 1.9, 5.6, 4.4, 3.3, 2.8, 6.1, 4.0, 3.7};
const std::vector<double> kY{1.8, 3.9, 2.2, 5.1, 4.9, 2.7, 3.1, 5.8, 3.6, 4.4};
const std::vector<double> kZ{5.2, 6.3, 4.8, 7.7, 6.0, 5.5, 6.9, 8.1, 5.9, 6.6};

// Student-t two-tailed p by Simpson integration of the density on [0, |t|].
double t_two_tailed(double t, double df) {
    const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * M_PI);
    auto f = [&](double x) { return c * std::pow(1 + x * x / df, -(df + 1) / 2); };
    const int n = 20000;
    const double a = std::abs(t), h = a / n;
    double s = f(0) + f(a);
    for (int i = 1; i < n; ++i) s += f(i * h) * (i % 2 ? 4 : 2);
    return 1.0 - 2.0 * s * h / 3.0;
}

double z_two_tailed(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

double avg(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double var(const std::vector<double>& v) {
    double m = avg(v), s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s / (v.size() - 1);
}

}  // namespace

TEST_CASE("percentile, mean, stddev") {
    CHECK(percentile({1, 2, 3, 4}, 0.75) == doctest::Approx(3.25));
    CHECK(percentile({5}, 0.3) == 5.0);
    CHECK(percentile({4, 1, 3, 2}, 0.0) == 1.0);
    CHECK(percentile({4, 1, 3, 2}, 1.0) == 4.0);
    CHECK(mean({1, 2, 3}) == 2.0);
    CHECK(stddev({2, 4, 4, 4, 5, 5, 7, 9}) == doctest::Approx(std::sqrt(32.0 / 7.0)));
}

TEST_CASE("pearson: identities and errors") {
    std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> neg{-1, -2, -3, -4, -5};
    CHECK(pearson(x, x).r == doctest::Approx(1.0));
    CHECK(pearson(x, neg).r == doctest::Approx(-1.0));
    CHECK_THROWS_AS(pearson(x, {1, 1, 1, 1, 1}), ZeroVariance);
    CHECK_THROWS(pearson({1, 2}, {1, 2}));
}

TEST_CASE("pearson: direct formula on a fixed ten-point dataset") {
    const double n = 10;
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < kX.size(); ++i) {
        sx += kX[i];
        sy += kY[i];
        sxx += kX[i] * kX[i];
        syy += kY[i] * kY[i];
        sxy += kX[i] * kY[i];
    }
    double r = (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
    double t = r * std::sqrt((n - 2) / (1 - r * r));
    auto res = pearson(kX, kY);
    CHECK(std::abs(res.r - r) <= 1e-12);
    CHECK(std::abs(res.t - t) <= 1e-9);
    CHECK(std::abs(res.p - t_two_tailed(t, n - 2)) <= 1e-8);
}

TEST_CASE("ranks average ties") {
    auto r = ranks({10, 20, 20, 30, 10});
    CHECK(r == std::vector<double>{1.5, 3.5, 3.5, 5, 1.5});
}

TEST_CASE("mann-whitney: pair counting and tie-corrected normal approximation") {
    auto check = [](const std::vector<double>& a, const std::vector<double>& b) {
        double u = 0;
        for (double x : a)
            for (double y : b) u += x > y ? 1.0 : x == y ? 0.5 : 0.0;
        const double n1 = a.size(), n2 = b.size(), n = n1 + n2;
        std::vector<double> all(a);
        all.insert(all.end(), b.begin(), b.end());
        double ties = 0;
        for (double v : all) {
            double t = std::count(all.begin(), all.end(), v);
            ties += (t * t * t - t) / t;  // each tie group contributes once over its members
        }
        double sd = std::sqrt(n1 * n2 / 12.0 * ((n + 1) - ties / (n * (n - 1))));
        double z = (u - n1 * n2 / 2) / sd;
        auto res = mann_whitney(a, b);
        CHECK(res.u == doctest::Approx(u).epsilon(1e-12));
        CHECK(std::abs(res.z - z) <= 1e-12);
        CHECK(std::abs(res.p - z_two_tailed(z)) <= 1e-12);
    };
    check(kX, kY);
    check(kX, kZ);
    check({1, 2, 2, 3, 3, 3, 4, 5, 5, 6}, {2, 3, 3, 4, 4, 5, 6, 6, 7, 8});
}

TEST_CASE("mann-whitney: identical constant samples show no effect") {
    auto res = mann_whitney({2, 2, 2}, {2, 2, 2});
    CHECK(res.z == 0.0);
    CHECK(res.p == 1.0);
}

TEST_CASE("welch: direct formula on fixed ten-point datasets") {
    for (const auto* b : {&kY, &kZ}) {
        double v1 = var(kX) / 10, v2 = var(*b) / 10;
        double t = (avg(kX) - avg(*b)) / std::sqrt(v1 + v2);
        double df = (v1 + v2) * (v1 + v2) / (v1 * v1 / 9 + v2 * v2 / 9);
        auto res = welch_t(kX, *b);
        CHECK(std::abs(res.t - t) <= 1e-12);
        CHECK(std::abs(res.df - df) <= 1e-9);
        CHECK(std::abs(res.p - t_two_tailed(t, df)) <= 1e-8);
    }
    auto same = welch_t({1, 1, 1}, {1, 1, 1});
    CHECK(same.t == 0.0);
    CHECK(same.p == 1.0);
    CHECK_THROWS_AS(welch_t({1}, {1, 2}), InsufficientData);
}
