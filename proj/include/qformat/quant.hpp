// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "qformat/codebook.hpp"
#include "qformat/tensor.hpp"

namespace qformat {

enum class Granularity { tensorwise, channelwise, subchannel };

enum class ClipMode { none, mse };

inline std::vector<double> default_mse_grid() {
    std::vector<double> grid(51);
    for (int i = 0; i <= 50; ++i) grid[i] = (50 + i) / 100.0;
    return grid;
}

struct QuantScheme {
    Codebook codebook;
    Granularity granularity = Granularity::subchannel;
    int block_size = 128;
    ClipMode clip = ClipMode::none;
    std::vector<double> mse_grid = default_mse_grid();
};

// Block-quantized tensor: one small index per element plus one scale per
// block. Blocks are contiguous runs of row-major elements.
struct QuantizedTensor {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> indices;
    std::vector<double> scales;
    QuantScheme scheme;
    bool short_blocks = false;

    std::size_t size() const { return indices.size(); }
};

struct ErrorReport {
    double mse = 0.0;
    double sqnr_db = 0.0;
    double max_abs_err = 0.0;
    std::vector<std::uint64_t> bin_histogram;
};

namespace detail {

struct BlockSpan {
    std::size_t offset;
    std::size_t length;
};

inline std::vector<BlockSpan> block_spans(std::size_t rows, std::size_t cols,
                                          Granularity granularity, int block_size) {
    std::vector<BlockSpan> spans;
    switch (granularity) {
        case Granularity::tensorwise:
            spans.push_back({0, rows * cols});
            break;
        case Granularity::channelwise:
            for (std::size_t r = 0; r < rows; ++r) spans.push_back({r * cols, cols});
            break;
        case Granularity::subchannel: {
            require(block_size >= 2, "subchannel block size must be >= 2");
            const auto b = static_cast<std::size_t>(block_size);
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < cols; c += b)
                    spans.push_back({r * cols + c, std::min(b, cols - c)});
            break;
        }
    }
    return spans;
}

}  // namespace detail

// Nearest codebook value by absolute distance; exact ties go to the value
// of smaller magnitude. Distances are evaluated on the raw grid (x scaled
// by max|raw|) so that ties on exactly representable raw values stay exact.
inline std::size_t encode_value(double x, const Codebook& cb) {
    require(std::isfinite(x), "encode_value: input must be finite");
    const double y = x * cb.max_abs_raw();
    const auto& vals = cb.raw_values;
    std::size_t best = 0;
    double best_dist = std::abs(y - vals[0]);
    for (std::size_t i = 1; i < vals.size(); ++i) {
        const double dist = std::abs(y - vals[i]);
        if (dist < best_dist ||
            (dist == best_dist && std::abs(vals[i]) < std::abs(vals[best]))) {
            best = i;
            best_dist = dist;
        }
    }
    return best;
}

// Grid search for the clip ratio minimizing the squared reconstruction
// error of one block; ties go to the larger ratio. Returns {scale, ratio}.
inline std::pair<double, double> mse_clip_scale(std::span<const double> block,
                                                const Codebook& cb,
                                                std::span<const double> grid) {
    require(!grid.empty(), "mse clip grid must be non-empty");
    bool has_one = false;
    for (double r : grid) {
        require(r > 0.0 && r <= 1.0, "mse clip ratios must lie in (0, 1]");
        has_one = has_one || r == 1.0;
    }
    require(has_one, "mse clip grid must contain 1.0");
    double absmax = 0.0;
    for (double x : block) absmax = std::max(absmax, std::abs(x));
    if (absmax == 0.0) return {1.0, 1.0};

    std::vector<double> ratios(grid.begin(), grid.end());
    std::sort(ratios.begin(), ratios.end());
    double best_ratio = 0.0;
    double best_err = std::numeric_limits<double>::infinity();
    for (double r : ratios) {
        const double scale = absmax * r;
        NeumaierSum err;
        for (double x : block) {
            const double rec = scale * cb.normalized_values[encode_value(x / scale, cb)];
            const double d = x - rec;
            err.add(d * d);
        }
        if (err.value() <= best_err) {
            best_err = err.value();
            best_ratio = r;
        }
    }
    return {absmax * best_ratio, best_ratio};
}

// Symmetric block-wise round-to-nearest quantization. Each block scale maps
// the block absmax onto the normalized endpoint 1.0 (times the clip ratio);
// all-zero blocks take scale 1 and the zero index.
inline QuantizedTensor quantize(const Tensor& t, const QuantScheme& scheme) {
    require(!t.data.empty(), "cannot quantize an empty tensor");
    require(t.data.size() == t.rows * t.cols, "tensor shape does not match its payload");
    for (std::size_t i = 0; i < t.data.size(); ++i)
        if (!std::isfinite(t.data[i]))
            throw std::invalid_argument("non-finite tensor element at (" +
                                        std::to_string(i / t.cols) + ", " +
                                        std::to_string(i % t.cols) + ")");

    const auto spans = detail::block_spans(t.rows, t.cols, scheme.granularity, scheme.block_size);
    QuantizedTensor qt;
    qt.rows = t.rows;
    qt.cols = t.cols;
    qt.scheme = scheme;
    qt.indices.resize(t.data.size());
    qt.scales.reserve(spans.size());
    const std::size_t zero_idx = scheme.codebook.zero_index();
    for (const auto& span : spans) {
        if (scheme.granularity == Granularity::subchannel &&
            span.length != static_cast<std::size_t>(scheme.block_size))
            qt.short_blocks = true;
        const double* block = t.data.data() + span.offset;
        double absmax = 0.0;
        for (std::size_t i = 0; i < span.length; ++i)
            absmax = std::max(absmax, std::abs(block[i]));
        if (absmax == 0.0) {
            qt.scales.push_back(1.0);
            for (std::size_t i = 0; i < span.length; ++i)
                qt.indices[span.offset + i] = static_cast<std::uint8_t>(zero_idx);
            continue;
        }
        double scale = absmax;
        if (scheme.clip == ClipMode::mse)
            scale = mse_clip_scale({block, span.length}, scheme.codebook, scheme.mse_grid).first;
        qt.scales.push_back(scale);
        for (std::size_t i = 0; i < span.length; ++i)
            qt.indices[span.offset + i] =
                static_cast<std::uint8_t>(encode_value(block[i] / scale, scheme.codebook));
    }
    return qt;
}

inline Tensor dequantize(const QuantizedTensor& qt) {
    const auto spans =
        detail::block_spans(qt.rows, qt.cols, qt.scheme.granularity, qt.scheme.block_size);
    require(spans.size() == qt.scales.size(), "scale count does not match block partitioning");
    const auto& values = qt.scheme.codebook.normalized_values;
    Tensor t(qt.rows, qt.cols);
    for (std::size_t b = 0; b < spans.size(); ++b) {
        const double scale = qt.scales[b];
        if (!(std::isfinite(scale) && scale > 0.0))
            throw std::runtime_error("corrupt quantized tensor: bad block scale");
        for (std::size_t i = 0; i < spans[b].length; ++i) {
            const std::size_t e = spans[b].offset + i;
            if (qt.indices[e] >= values.size())
                throw std::runtime_error("corrupt quantized tensor: index out of range");
            t.data[e] = scale * values[qt.indices[e]];
        }
    }
    return t;
}

// Reconstruction-error metrics; sums use compensated accumulation. A zero
// error sum reports +infinity SQNR.
inline ErrorReport error_report(const Tensor& original, const Tensor& reconstructed,
                                const QuantizedTensor& qt) {
    require(original.rows == reconstructed.rows && original.cols == reconstructed.cols,
            "error_report: shape mismatch between original and reconstruction");
    require(original.rows == qt.rows && original.cols == qt.cols,
            "error_report: shape mismatch with the quantized tensor");
    ErrorReport report;
    NeumaierSum err2;
    NeumaierSum sig2;
    for (std::size_t i = 0; i < original.data.size(); ++i) {
        const double d = original.data[i] - reconstructed.data[i];
        err2.add(d * d);
        sig2.add(original.data[i] * original.data[i]);
        report.max_abs_err = std::max(report.max_abs_err, std::abs(d));
    }
    const double n = static_cast<double>(original.data.size());
    report.mse = err2.value() / n;
    report.sqnr_db = err2.value() == 0.0
                         ? std::numeric_limits<double>::infinity()
                         : 10.0 * std::log10(sig2.value() / err2.value());
    report.bin_histogram.assign(qt.scheme.codebook.size(), 0);
    for (std::uint8_t idx : qt.indices) ++report.bin_histogram[idx];
    return report;
}

// Coefficient of variation of the per-value index counts.
inline double bin_load_stats(const QuantizedTensor& qt) {
    require(!qt.indices.empty(), "bin_load_stats: empty quantized tensor");
    std::vector<std::uint64_t> counts(qt.scheme.codebook.size(), 0);
    for (std::uint8_t idx : qt.indices) ++counts[idx];
    const double mean = static_cast<double>(qt.indices.size()) / counts.size();
    double var = 0.0;
    for (std::uint64_t c : counts) {
        const double d = static_cast<double>(c) - mean;
        var += d * d;
    }
    var /= static_cast<double>(counts.size());
    return std::sqrt(var) / mean;
}

}  // namespace qformat
