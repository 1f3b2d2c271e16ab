// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qformat/codebook.hpp"

namespace qformat {

enum class CostSource { paper_reference, estimated };

// MAC-unit implementation cost of one datatype (28nm synthesis reference
// data); accumulators are sized to add 256 products losslessly.
struct MacCost {
    std::string format;
    int operand_bits = 4;
    int accum_bits = 0;
    double mult_area_um2 = 0.0;
    double accum_area_um2 = 0.0;
    double mac_area_um2 = 0.0;
    double power_uw = 0.0;
    CostSource source = CostSource::paper_reference;
};

inline const std::vector<MacCost>& paper_mac_costs() {
    static const std::vector<MacCost> rows = {
        {"int4", 4, 16, 75.3, 85.4, 160.7, 48.5, CostSource::paper_reference},
        {"int5", 5, 18, 106.6, 97.0, 203.6, 59.8, CostSource::paper_reference},
        {"e2m1-i", 4, 20, 119.1, 109.1, 228.2, 59.7, CostSource::paper_reference},
        {"e2m1-b", 4, 23, 137.9, 131.0, 268.9, 67.9, CostSource::paper_reference},
        {"e2m1", 4, 17, 79.7, 90.7, 170.4, 49.6, CostSource::paper_reference},
        {"e2m1-sr", 4, 18, 96.8, 94.5, 191.3, 53.5, CostSource::paper_reference},
        {"e2m1-sp", 4, 19, 121.5, 96.5, 218.0, 54.6, CostSource::paper_reference},
        {"e3m0", 4, 22, 98.0, 119.7, 217.7, 59.5, CostSource::paper_reference},
        {"apot4", 4, 16, 96.2, 85.4, 181.6, 47.2, CostSource::paper_reference},
        {"apot4-sp", 4, 16, 99.7, 85.4, 185.1, 45.5, CostSource::paper_reference},
    };
    return rows;
}

inline MacCost paper_mac_cost(const std::string& format) {
    for (const auto& row : paper_mac_costs())
        if (row.format == format) return row;
    std::string valid;
    for (const auto& row : paper_mac_costs())
        valid += (valid.empty() ? "" : ", ") + row.format;
    throw std::invalid_argument("no MAC cost data for '" + format + "'; known formats: " + valid);
}

// Lossless fixed-point accumulator width for summing n_terms products:
// express the values as integers on their power-of-two lsb grid, bound the
// product by max^2, and add a sign bit. Lookup codebooks are off-grid and
// report not-applicable.
inline int estimate_accumulator_bits(const Codebook& cb, int n_terms = 256) {
    require(n_terms >= 1, "accumulator estimate needs n_terms >= 1");
    require(!cb.raw_values.empty(), "accumulator estimate needs a non-empty codebook");
    for (int e = 0; e <= 24; ++e) {
        const double s = std::ldexp(1.0, e);
        bool on_grid = true;
        std::uint64_t max_int = 0;
        for (double v : cb.raw_values) {
            const double scaled = std::abs(v) * s;
            if (scaled > 1e15 || scaled != std::floor(scaled)) {
                on_grid = false;
                break;
            }
            max_int = std::max(max_int, static_cast<std::uint64_t>(scaled));
        }
        if (on_grid && max_int > 0) {
            const std::uint64_t worst_sum =
                static_cast<std::uint64_t>(n_terms) * max_int * max_int;
            return static_cast<int>(std::bit_width(worst_sum)) + 1;
        }
        if (on_grid) break;
    }
    throw std::domain_error("accumulator estimate not applicable to '" + cb.name +
                            "': values are not on a dyadic grid");
}

// Whole-chip area overhead relative to a baseline format, with the MAC array
// and the memory system taken as fixed fractions of the die.
inline double chip_overhead(double mac_area, double baseline_mac_area, int bits,
                            int baseline_bits, double mac_frac = 0.10, double mem_frac = 0.60) {
    require(mac_area > 0.0 && baseline_mac_area > 0.0, "MAC areas must be positive");
    require(bits >= 1 && baseline_bits >= 1, "bit widths must be >= 1");
    return 100.0 * (mac_frac * (mac_area / baseline_mac_area - 1.0) +
                    mem_frac * (static_cast<double>(bits) / baseline_bits - 1.0));
}

struct ParetoPoint {
    std::string format;
    double quality = 0.0;
    double overhead_pct = 0.0;
};

// Points not dominated by any other (higher-or-equal quality and
// lower-or-equal overhead, at least one strict), sorted by overhead.
inline std::vector<ParetoPoint> pareto_front(const std::vector<ParetoPoint>& points) {
    require(!points.empty(), "pareto_front: need at least one point");
    std::vector<ParetoPoint> front;
    for (const auto& p : points) {
        bool dominated = false;
        for (const auto& q : points) {
            if (q.quality >= p.quality && q.overhead_pct <= p.overhead_pct &&
                (q.quality > p.quality || q.overhead_pct < p.overhead_pct)) {
                dominated = true;
                break;
            }
        }
        if (!dominated) front.push_back(p);
    }
    std::sort(front.begin(), front.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
        if (a.overhead_pct != b.overhead_pct) return a.overhead_pct < b.overhead_pct;
        if (a.quality != b.quality) return a.quality > b.quality;
        return a.format < b.format;
    });
    return front;
}

}  // namespace qformat
