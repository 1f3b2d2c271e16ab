// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "qformat/math_util.hpp"

namespace qformat {

namespace detail {

// Above this the t-distribution is evaluated through its normal-limit
// expansion; the incomplete-beta route loses accuracy to lgamma
// cancellation and slow continued-fraction convergence.
inline constexpr double kLargeNu = 1.0e5;

inline double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Continued fraction for the regularized incomplete beta function,
// modified Lentz algorithm.
// https://en.wikipedia.org/wiki/Beta_function#Incomplete_beta_function
inline double beta_continued_fraction(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 3e-16;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) <= eps) break;
    }
    return h;
}

inline double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_bt = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
    const double bt = std::exp(log_bt);
    if (x < (a + 1.0) / (a + b + 2.0))
        return bt * beta_continued_fraction(a, b, x) / a;
    return 1.0 - bt * beta_continued_fraction(b, a, 1.0 - x) / b;
}

// log of Gamma(x + 1/2) / Gamma(x) for large x, from the asymptotic ratio
// sqrt(x) * (1 - 1/(8x) + 1/(128x^2) + 5/(1024x^3) - 21/(32768x^4)).
inline double log_gamma_half_ratio_large(double x) {
    const double ix = 1.0 / x;
    const double series =
        1.0 + ix * (-1.0 / 8.0 + ix * (1.0 / 128.0 + ix * (5.0 / 1024.0 + ix * (-21.0 / 32768.0))));
    return 0.5 * std::log(x) + std::log(series);
}

// log of the t normalization constant Gamma((nu+1)/2) / (sqrt(nu*pi) * Gamma(nu/2)).
inline double t_log_norm_constant(double nu) {
    const double half_nu = 0.5 * nu;
    double log_ratio;
    if (nu > kLargeNu)
        log_ratio = log_gamma_half_ratio_large(half_nu);
    else
        log_ratio = std::lgamma(half_nu + 0.5) - std::lgamma(half_nu);
    return log_ratio - 0.5 * std::log(nu * M_PI);
}

}  // namespace detail

inline void check_nu(double nu) {
    require(std::isfinite(nu) && nu > 0.0, "degrees of freedom must be finite and > 0");
}

inline void check_probability(double p) {
    require(p > 0.0 && p < 1.0, "probability must lie in the open interval (0, 1)");
}

// Student's t density with nu degrees of freedom.
// https://en.wikipedia.org/wiki/Student%27s_t-distribution
inline double t_pdf(double t, double nu) {
    check_nu(nu);
    const double log_pdf =
        detail::t_log_norm_constant(nu) - 0.5 * (nu + 1.0) * std::log1p(t * t / nu);
    return std::exp(log_pdf);
}

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / M_SQRT2);
}

// CDF through the regularized incomplete beta identity
// F(t) = 1 - I_{nu/(nu+t^2)}(nu/2, 1/2) / 2 for t >= 0.
inline double t_cdf(double t, double nu) {
    check_nu(nu);
    if (t == 0.0) return 0.5;
    if (nu > detail::kLargeNu) {
        // Normal limit with the leading 1/nu correction, consistent with
        // the expansion used by t_quantile.
        const double z = t - (t * t * t + t) / (4.0 * nu);
        return normal_cdf(z);
    }
    const double x = nu / (nu + t * t);
    const double half_tail = 0.5 * detail::regularized_incomplete_beta(0.5 * nu, 0.5, x);
    return t > 0.0 ? 1.0 - half_tail : half_tail;
}

namespace detail {

// Acklam's rational approximation to the inverse normal CDF,
// https://web.archive.org/web/20151110174102/http://home.online.no/~pjacklam/notes/invnorm/
// refined below by Newton steps on the erfc-based CDF.
inline double acklam_inverse_normal(double p) {
    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

inline double normal_quantile_upper(double p) {
    double x = acklam_inverse_normal(p);
    for (int i = 0; i < 2; ++i) {
        const double err = normal_cdf(x) - p;
        const double density = normal_pdf(x);
        if (density <= 0.0) break;
        x -= err / density;
    }
    return x;
}

double t_quantile_upper(double p, double nu);

}  // namespace detail

// Inverse standard normal CDF. Odd symmetry is exact by reduction.
inline double normal_quantile(double p) {
    check_probability(p);
    if (p == 0.5) return 0.0;
    if (p < 0.5) return -detail::normal_quantile_upper(1.0 - p);
    return detail::normal_quantile_upper(p);
}

// Inverse CDF of the Student's t-distribution; safeguarded bisection with
// Newton refinement on t_cdf, tolerance 1e-12.
inline double t_quantile(double p, double nu) {
    check_probability(p);
    check_nu(nu);
    if (p == 0.5) return 0.0;
    if (p < 0.5) return -detail::t_quantile_upper(1.0 - p, nu);
    return detail::t_quantile_upper(p, nu);
}

namespace detail {

inline double t_quantile_upper(double p, double nu) {
    if (nu > kLargeNu) {
        // Cornish-Fisher expansion around the normal quantile.
        const double z = normal_quantile_upper(p);
        const double z3 = z * z * z;
        const double z5 = z3 * z * z;
        return z + (z3 + z) / (4.0 * nu) + (5.0 * z5 + 16.0 * z3 + 3.0 * z) / (96.0 * nu * nu);
    }
    double lo = 0.0;
    double hi = 1.0;
    while (t_cdf(hi, nu) < p) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) break;
    }
    double t = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double err = t_cdf(t, nu) - p;
        if (err > 0.0)
            hi = t;
        else if (err < 0.0)
            lo = t;
        else
            return t;
        const double density = t_pdf(t, nu);
        double next = density > 0.0 ? t - err / density : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(err) <= 1e-15 && hi - lo <= 1e-12 * std::max(1.0, std::abs(t))) return next;
        if (next == t) return t;
        t = next;
    }
    return t;
}

}  // namespace detail

// Deterministic random source. Every distribution below is implemented in
// terms of raw mt19937_64 output so streams are identical across platforms
// (the standard library distributions are implementation-defined).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform in the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
            std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    // Box-Muller transform.
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Marsaglia-Tsang for alpha >= 1, boosted below 1.
    double gamma(double alpha) {
        if (alpha < 1.0) {
            const double u = uniform();
            return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
        }
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        while (true) {
            double x;
            double v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            const double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double chi_square(double nu) { return 2.0 * gamma(0.5 * nu); }

    std::uint64_t raw() { return gen_(); }

  private:
    std::mt19937_64 gen_;
};

// n draws of scale * T(nu) built as normal / sqrt(chi_square(nu) / nu).
inline std::vector<double> sample_t(std::size_t n, double nu, double scale, std::uint64_t seed) {
    require(n >= 1, "sample count must be >= 1");
    check_nu(nu);
    require(std::isfinite(scale) && scale > 0.0, "scale must be finite and > 0");
    Rng rng(seed);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = rng.normal();
        const double w = rng.chi_square(nu);
        out[i] = scale * z / std::sqrt(w / nu);
    }
    return out;
}

inline std::vector<double> sample_normal(std::size_t n, double sigma, std::uint64_t seed) {
    require(n >= 1, "sample count must be >= 1");
    require(std::isfinite(sigma) && sigma > 0.0, "scale must be finite and > 0");
    Rng rng(seed);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = sigma * rng.normal();
    return out;
}

}  // namespace qformat
