#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "oracles.hpp"
#include "ubirisk/common.hpp"
#include "ubirisk/rng.hpp"
#include "ubirisk/stats.hpp"

using namespace ubirisk;

TEST_CASE("median") {
    CHECK(median({3.0}) == 3.0);
    CHECK(median({1.0, 2.0, 3.0}) == 2.0);
    CHECK(median({1.0, 2.0, 3.0, 4.0}) == 2.5);
    CHECK(median({9.0, 8.0, 17.0, 9.0, 109.0}) == 9.0);

    // Odd-length medians are elements of the list.
    Rng rng(7);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> v;
        const size_t n = 2 * rng.below(10) + 1;
        for (size_t i = 0; i < n; ++i) v.push_back(rng.normal());
        const double m = median(v);
        CHECK(std::count(v.begin(), v.end(), m) > 0);
    }
}

TEST_CASE("welch t-test basics") {
    // Identical samples: t = 0, p = 1.
    std::vector<double> a = {1.0, 2.0, 3.0, 4.0};
    auto r = welch_t_test(a, a);
    CHECK(r.t == 0.0);
    CHECK(r.p == doctest::Approx(1.0));

    // Extreme separation.
    std::vector<double> g0 = {0.0, 0.0, 0.0, 1.0};
    std::vector<double> g1 = {10.0, 10.0, 10.0, 11.0};
    auto sep = welch_t_test(g0, g1);
    CHECK(sep.p < 0.0001);

    std::vector<double> flat = {2.0, 2.0, 2.0};
    CHECK_THROWS_AS(welch_t_test(flat, flat), NumericError);
    std::vector<double> one = {1.0};
    CHECK_THROWS_AS(welch_t_test(one, a), NumericError);
}

TEST_CASE("welch p-value matches t-CDF quadrature oracle") {
    // Fixed 20-point pair.
    std::vector<double> g0 = {1.1,  0.3, -0.7, 2.2, 0.9, 1.4, -0.2, 0.8, 1.9, 0.4,
                              -1.3, 0.6, 1.0,  0.2, 1.6, 0.7, -0.5, 1.2, 0.1, 0.9};
    std::vector<double> g1 = {1.8, 2.3, 0.9, 3.1, 1.5, 2.7, 1.1,  2.0, 2.9, 1.4,
                              0.6, 2.2, 1.7, 2.5, 1.3, 3.4, 0.8,  2.1, 1.9, 2.6};
    auto r = welch_t_test(g0, g1);
    const double oracle_p = 2.0 * (1.0 - oracles::t_cdf_quadrature(std::fabs(r.t), r.df));
    CHECK(r.p == doctest::Approx(oracle_p).epsilon(1e-8));

    // And across a range of t/df values the CDF itself agrees.
    for (double t : {-3.0, -0.5, 0.0, 0.7, 2.4}) {
        for (double df : {1.5, 4.0, 11.7, 60.0}) {
            CHECK(student_t_cdf(t, df) ==
                  doctest::Approx(oracles::t_cdf_quadrature(t, df)).epsilon(1e-8));
        }
    }
}

TEST_CASE("normal cdf sanity") {
    CHECK(norm_cdf(0.0) == doctest::Approx(0.5));
    CHECK(norm_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-9));
}
