// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "qformat/tdist.hpp"
#include "qformat/tensor.hpp"

namespace qformat {

struct NormalFit {
    double sigma = 0.0;
    double loc = 0.0;
    double ks = 0.0;
};

struct TDistFit {
    double nu = 0.0;
    double scale = 0.0;
    double loc = 0.0;
    double loglik = 0.0;
    double ks = 0.0;
};

// Two-sided Kolmogorov-Smirnov sup-distance between sorted samples and a
// model CDF: max_i max(|F(x_i) - i/n|, |F(x_i) - (i-1)/n|).
inline double ks_distance(std::span<const double> sorted,
                          const std::function<double(double)>& cdf) {
    require(!sorted.empty(), "ks_distance: need at least one sample");
    for (std::size_t i = 1; i < sorted.size(); ++i)
        require(sorted[i - 1] <= sorted[i], "ks_distance: samples must be sorted ascending");
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    }
    return d;
}

namespace detail {

inline constexpr std::size_t kMinFitSamples = 30;

struct CenteredData {
    std::vector<double> centered;
    double mean = 0.0;
    double variance = 0.0;
};

inline CenteredData center_samples(std::span<const double> samples, const char* op) {
    require(samples.size() >= kMinFitSamples,
            std::string(op) + ": need at least 30 samples");
    NeumaierSum sum;
    for (double x : samples) {
        require(std::isfinite(x), std::string(op) + ": samples must be finite");
        sum.add(x);
    }
    CenteredData out;
    out.mean = sum.value() / static_cast<double>(samples.size());
    out.centered.resize(samples.size());
    NeumaierSum var;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out.centered[i] = samples[i] - out.mean;
        var.add(out.centered[i] * out.centered[i]);
    }
    out.variance = var.value() / static_cast<double>(samples.size());
    require(out.variance > 0.0, std::string(op) + ": degenerate data with zero variance");
    return out;
}

// Location-scale t log-likelihood with fixed location.
inline double t_loglik(const std::vector<double>& centered, double nu, double sigma) {
    const double n = static_cast<double>(centered.size());
    NeumaierSum tail;
    const double inv_sigma2 = 1.0 / (sigma * sigma);
    for (double c : centered) tail.add(std::log1p(c * c * inv_sigma2 / nu));
    return n * (t_log_norm_constant(nu) - std::log(sigma)) - 0.5 * (nu + 1.0) * tail.value();
}

// Scale MLE for fixed nu via the EM fixed point
// sigma^2 <- mean(w_i * c_i^2), w_i = (nu+1) / (nu + c_i^2 / sigma^2).
inline double t_scale_mle(const std::vector<double>& centered, double nu, double sigma0) {
    double s2 = sigma0 * sigma0;
    for (int iter = 0; iter < 200; ++iter) {
        NeumaierSum acc;
        for (double c : centered) {
            const double c2 = c * c;
            acc.add(c2 * (nu + 1.0) / (nu + c2 / s2));
        }
        const double next = acc.value() / static_cast<double>(centered.size());
        const bool done = std::abs(next - s2) <= 1e-12 * s2;
        s2 = next;
        if (done) break;
    }
    return std::sqrt(s2);
}

}  // namespace detail

// Gaussian MLE (location = sample mean, sigma = population standard
// deviation) with the KS distance of the fitted CDF.
inline NormalFit fit_normal(std::span<const double> samples) {
    const auto data = detail::center_samples(samples, "fit_normal");
    NormalFit fit;
    fit.loc = data.mean;
    fit.sigma = std::sqrt(data.variance);
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    fit.ks = ks_distance(sorted, [&fit](double x) {
        return normal_cdf((x - fit.loc) / fit.sigma);
    });
    return fit;
}

// Location-scale t fit by maximum likelihood with the location pinned at the
// sample mean: 25-point log-spaced nu grid on [0.5, 200] with a per-nu scale
// MLE, then golden-section refinement of nu to relative tolerance 1e-3.
inline TDistFit fit_student_t(std::span<const double> samples) {
    const auto data = detail::center_samples(samples, "fit_student_t");
    constexpr double nu_lo = 0.5;
    constexpr double nu_hi = 200.0;
    constexpr int grid_points = 25;

    auto scale_seed = [&data](double nu) {
        return std::sqrt(data.variance * nu / (nu + 2.0));
    };
    std::vector<double> nus(grid_points);
    for (int i = 0; i < grid_points; ++i)
        nus[i] = nu_lo * std::pow(nu_hi / nu_lo, static_cast<double>(i) / (grid_points - 1));

    int best_idx = 0;
    double best_ll = -std::numeric_limits<double>::infinity();
    double best_sigma = scale_seed(nus[0]);
    for (int i = 0; i < grid_points; ++i) {
        const double sigma = detail::t_scale_mle(data.centered, nus[i], scale_seed(nus[i]));
        const double ll = detail::t_loglik(data.centered, nus[i], sigma);
        if (ll > best_ll) {
            best_ll = ll;
            best_idx = i;
            best_sigma = sigma;
        }
    }

    double a = std::log(nus[std::max(0, best_idx - 1)]);
    double b = std::log(nus[std::min(grid_points - 1, best_idx + 1)]);
    auto eval = [&](double log_nu) {
        const double nu = std::exp(log_nu);
        const double sigma = detail::t_scale_mle(data.centered, nu, best_sigma);
        return std::pair<double, double>(detail::t_loglik(data.centered, nu, sigma), sigma);
    };
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    auto [f1, s1] = eval(x1);
    auto [f2, s2] = eval(x2);
    while (b - a > 1e-3) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            std::tie(f2, s2) = eval(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            std::tie(f1, s1) = eval(x1);
        }
    }

    TDistFit fit;
    fit.loc = data.mean;
    fit.nu = std::exp(0.5 * (a + b));
    fit.scale = detail::t_scale_mle(data.centered, fit.nu, best_sigma);
    fit.loglik = detail::t_loglik(data.centered, fit.nu, fit.scale);
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    fit.ks = ks_distance(sorted, [&fit](double x) {
        return t_cdf((x - fit.loc) / fit.scale, fit.nu);
    });
    return fit;
}

// KS(best-fit normal) - KS(best-fit t); positive when the t fits closer.
inline double ks_delta(std::span<const double> samples) {
    return fit_normal(samples).ks - fit_student_t(samples).ks;
}

struct ProfileRow {
    std::string tensor;
    double nu_mean = 0.0;
    double nu_var = 0.0;
    double ks_delta = 0.0;
    TDistFit t;
    NormalFit normal;
};

struct NamedTensor {
    std::string name;
    const Tensor* tensor = nullptr;
};

// Per-tensor fits plus one trailing aggregate row. Tensors larger than
// 10^6 elements are uniformly downsampled with the given seed.
inline std::vector<ProfileRow> profile_tensor_set(const std::vector<NamedTensor>& tensors,
                                                  std::uint64_t seed,
                                                  std::size_t sample_cap = 1000000) {
    require(!tensors.empty(), "profile_tensor_set: need at least one tensor");
    std::vector<ProfileRow> rows;
    for (const auto& [name, tensor] : tensors) {
        require(tensor != nullptr, "profile_tensor_set: null tensor");
        std::vector<double> samples;
        if (tensor->data.size() > sample_cap) {
            Rng rng(seed);
            std::vector<std::size_t> order(tensor->data.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            for (std::size_t i = 0; i < sample_cap; ++i) {
                const std::size_t j = i + rng.uniform_below(order.size() - i);
                std::swap(order[i], order[j]);
            }
            order.resize(sample_cap);
            std::sort(order.begin(), order.end());
            samples.reserve(sample_cap);
            for (std::size_t idx : order) samples.push_back(tensor->data[idx]);
        } else {
            samples = tensor->data;
        }
        ProfileRow row;
        row.tensor = name;
        row.t = fit_student_t(samples);
        row.normal = fit_normal(samples);
        row.nu_mean = row.t.nu;
        row.nu_var = 0.0;
        row.ks_delta = row.normal.ks - row.t.ks;
        rows.push_back(std::move(row));
    }

    ProfileRow agg;
    agg.tensor = "aggregate";
    const double n = static_cast<double>(rows.size());
    for (const auto& r : rows) {
        agg.nu_mean += r.t.nu / n;
        agg.ks_delta += r.ks_delta / n;
        agg.t.nu += r.t.nu / n;
        agg.t.scale += r.t.scale / n;
        agg.t.ks += r.t.ks / n;
        agg.normal.sigma += r.normal.sigma / n;
        agg.normal.ks += r.normal.ks / n;
    }
    for (const auto& r : rows) {
        const double d = r.t.nu - agg.nu_mean;
        agg.nu_var += d * d / n;
    }
    rows.push_back(std::move(agg));
    return rows;
}

}  // namespace qformat
