// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracle_helpers.hpp"
#include "qformat/tdist.hpp"

using namespace qformat;

TEST_CASE("t pdf closed-form peaks") {
    CHECK(t_pdf(0.0, 1.0) == doctest::Approx(1.0 / M_PI).epsilon(1e-13));
    // normal limit at the peak
    CHECK(std::abs(t_pdf(0.0, 1e9) - 1.0 / std::sqrt(2.0 * M_PI)) < 1e-9);
    CHECK(t_pdf(2.5, 3.0) == t_pdf(-2.5, 3.0));
}

TEST_CASE("t pdf against quadrature of the unnormalized kernel") {
    // normalize (1 + t^2/2)^(-3/2) numerically and compare at t = 1
    auto kernel = [](double t) { return std::pow(1.0 + t * t / 2.0, -1.5); };
    const double z = oracle::integrate_real_line(kernel);
    CHECK(t_pdf(1.0, 2.0) == doctest::Approx(kernel(1.0) / z).epsilon(1e-10));
    CHECK(t_pdf(1.0, 2.0) == doctest::Approx(1.0 / (3.0 * std::sqrt(3.0))).epsilon(1e-13));
}

TEST_CASE("t pdf integrates to one") {
    for (double nu : {1.0, 2.0, 5.0, 37.5}) {
        const double z = oracle::integrate_real_line([nu](double t) { return t_pdf(t, nu); });
        CHECK(z == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("t cdf closed forms and symmetry") {
    CHECK(t_cdf(0.0, 5.0) == 0.5);
    CHECK(t_cdf(1.0, 1.0) == doctest::Approx(0.75).epsilon(1e-11));
    CHECK(t_cdf(1.0, 2.0) ==
          doctest::Approx(0.5 + 1.0 / (2.0 * std::sqrt(3.0))).epsilon(1e-11));
    // Cauchy CDF is 1/2 + atan(t)/pi
    for (double t : {-7.0, -0.3, 0.9, 25.0})
        CHECK(std::abs(t_cdf(t, 1.0) - (0.5 + std::atan(t) / M_PI)) < 1e-10);
    // nu = 2 closed form is 1/2 + t / (2 sqrt(t^2 + 2))
    for (double t : {-4.0, -1.2, 0.4, 11.0})
        CHECK(std::abs(t_cdf(t, 2.0) - (0.5 + t / (2.0 * std::sqrt(t * t + 2.0)))) < 1e-10);
    // monotone nondecreasing
    double prev = 0.0;
    for (double t = -30.0; t <= 30.0; t += 0.25) {
        const double f = t_cdf(t, 3.0);
        CHECK(f >= prev);
        prev = f;
    }
}

TEST_CASE("t cdf against quadrature") {
    const double z = oracle::integrate_real_line([](double t) { return t_pdf(t, 2.0); });
    auto mass_below = [&](double x) {
        // integrate the mapped density up to s with t(s) = x
        const double s = (std::sqrt(1.0 + 4.0 * x * x) - 1.0) / (2.0 * x);
        auto mapped = [](double u) {
            const double d = 1.0 - u * u;
            if (d <= 0.0) return 0.0;
            return t_pdf(u / d, 2.0) * (1.0 + u * u) / (d * d);
        };
        return oracle::integrate(mapped, -1.0, s) / z;
    };
    for (double x : {-2.0, 1.0, 3.5})
        CHECK(t_cdf(x, 2.0) == doctest::Approx(mass_below(x)).epsilon(1e-9));
}

TEST_CASE("t quantile examples") {
    CHECK(t_quantile(0.5, 5.0) == 0.0);
    CHECK(t_quantile(0.975, 1.0) ==
          doctest::Approx(std::tan(M_PI * 0.475)).epsilon(1e-10));
    const double p = 0.975;
    CHECK(t_quantile(p, 2.0) ==
          doctest::Approx((2.0 * p - 1.0) * std::sqrt(2.0 / (4.0 * p * (1.0 - p))))
              .epsilon(1e-10));
}

TEST_CASE("cdf/quantile round trip and closed-form agreement") {
    for (double nu : {1.0, 2.0, 3.0, 5.0, 10.0, 100.0}) {
        for (double p = 0.001; p < 0.999; p += 0.001) {
            const double t = t_quantile(p, nu);
            CHECK(std::abs(t_cdf(t, nu) - p) <= 1e-9);
        }
    }
    for (double p = 0.001; p < 0.999; p += 0.001) {
        const double cauchy = std::tan(M_PI * (p - 0.5));
        CHECK(std::abs(t_quantile(p, 1.0) - cauchy) <= 1e-10 * std::max(1.0, std::abs(cauchy)));
        const double nu2 = (2.0 * p - 1.0) * std::sqrt(2.0 / (4.0 * p * (1.0 - p)));
        CHECK(std::abs(t_quantile(p, 2.0) - nu2) <= 1e-10 * std::max(1.0, std::abs(nu2)));
    }
}

TEST_CASE("quantile odd symmetry is exact") {
    for (double nu : {1.0, 4.5, 50.0})
        for (double p : {0.001, 0.23, 0.4999, 0.77, 0.9999})
            CHECK(t_quantile(p, nu) == -t_quantile(1.0 - p, nu));
}

TEST_CASE("normal quantile") {
    CHECK(normal_quantile(0.5) == 0.0);
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
    for (double p = 0.0005; p < 1.0; p += 0.0101) {
        CHECK(std::abs(normal_quantile(p) - oracle::normal_quantile_bisect(p)) <= 1e-9);
        CHECK(normal_quantile(p) + normal_quantile(1.0 - p) == 0.0);
    }
}

TEST_CASE("normal limit of the t quantile") {
    double worst = 0.0;
    for (double p = 0.001; p < 0.999; p += 0.001)
        worst = std::max(worst, std::abs(t_quantile(p, 1e6) - normal_quantile(p)));
    CHECK(worst <= 1e-3);
}

TEST_CASE("peak and tail ordering in nu") {
    const double nus[] = {1.0, 2.0, 3.0, 5.0, 10.0, 100.0};
    for (std::size_t i = 1; i < std::size(nus); ++i) {
        CHECK(t_pdf(0.0, nus[i - 1]) < t_pdf(0.0, nus[i]));
        CHECK(t_pdf(6.0, nus[i - 1]) > t_pdf(6.0, nus[i]));
    }
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(t_pdf(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(t_pdf(1.0, -3.0), std::invalid_argument);
    CHECK_THROWS_AS(t_cdf(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(t_quantile(0.0, 5.0), std::invalid_argument);
    CHECK_THROWS_AS(t_quantile(1.0, 5.0), std::invalid_argument);
    CHECK_THROWS_AS(t_quantile(0.5, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
    CHECK_THROWS_AS(sample_t(0, 5.0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_t(8, 5.0, 0.0, 1), std::invalid_argument);
}

TEST_CASE("sampling determinism") {
    const auto a = sample_t(10, 5.0, 1.0, 7);
    const auto b = sample_t(10, 5.0, 1.0, 7);
    CHECK(a == b);
    const auto c = sample_t(10, 5.0, 1.0, 8);
    CHECK(a != c);
}

TEST_CASE("sampling moments") {
    auto xs = sample_t(1000000, 5.0, 1.0, 20240321);
    std::nth_element(xs.begin(), xs.begin() + xs.size() / 2, xs.end());
    const double median = xs[xs.size() / 2];
    CHECK(std::abs(median) <= 0.01);

    const auto ys = sample_t(1000000, 1e6, 1.0, 99);
    double sum = 0.0;
    for (double y : ys) sum += y;
    const double mean = sum / static_cast<double>(ys.size());
    double var = 0.0;
    for (double y : ys) var += (y - mean) * (y - mean);
    var /= static_cast<double>(ys.size());
    CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(0.005));
}
