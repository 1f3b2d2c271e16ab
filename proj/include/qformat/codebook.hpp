// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qformat/tdist.hpp"

namespace qformat {

enum class Family { integer, fp, lookup, apot };

inline const char* family_name(Family f) {
    switch (f) {
        case Family::integer: return "integer";
        case Family::fp: return "float";
        case Family::lookup: return "lookup";
        case Family::apot: return "apot";
    }
    return "?";
}

inline Family family_from_name(const std::string& s) {
    if (s == "integer") return Family::integer;
    if (s == "float") return Family::fp;
    if (s == "lookup") return Family::lookup;
    if (s == "apot") return Family::apot;
    throw std::invalid_argument("unknown codebook family '" + s + "'");
}

// A k-bit datatype: the sorted set of representable values, in the format's
// native scale (raw) and normalized into [-1, 1] by the largest magnitude.
struct Codebook {
    std::string name;
    int bits = 0;
    Family family = Family::lookup;
    std::vector<double> raw_values;
    std::vector<double> normalized_values;
    std::optional<double> nu;

    std::size_t size() const { return raw_values.size(); }

    double max_abs_raw() const {
        return raw_values.empty()
                   ? 0.0
                   : std::max(std::abs(raw_values.front()), std::abs(raw_values.back()));
    }

    std::size_t zero_index() const {
        for (std::size_t i = 0; i < raw_values.size(); ++i)
            if (raw_values[i] == 0.0) return i;
        throw std::invalid_argument("codebook '" + name + "' has no zero value");
    }
};

inline Codebook make_codebook(std::string name, int bits, Family family,
                              std::vector<double> raw, std::optional<double> nu = {}) {
    Codebook cb;
    cb.name = std::move(name);
    cb.bits = bits;
    cb.family = family;
    cb.raw_values = std::move(raw);
    cb.nu = nu;
    const double m = cb.max_abs_raw();
    cb.normalized_values.resize(cb.raw_values.size());
    for (std::size_t i = 0; i < cb.raw_values.size(); ++i)
        cb.normalized_values[i] = m > 0.0 ? cb.raw_values[i] / m : cb.raw_values[i];
    return cb;
}

// Spec of the Codebook invariants; returns one entry per failed check.
inline std::vector<std::string> validate(const Codebook& cb) {
    std::vector<std::string> violations;
    const auto& raw = cb.raw_values;
    if (raw.empty()) {
        violations.push_back("empty value set");
        return violations;
    }
    bool finite = true;
    for (double v : raw) finite = finite && std::isfinite(v);
    if (!finite) violations.push_back("non-finite value");
    for (std::size_t i = 1; i < raw.size(); ++i)
        if (!(raw[i - 1] < raw[i])) {
            violations.push_back("values not strictly increasing");
            break;
        }
    if (std::count(raw.begin(), raw.end(), 0.0) != 1)
        violations.push_back("missing exact zero");
    const std::size_t full = std::size_t{1} << cb.bits;
    if (cb.bits < 2 || (raw.size() != full && raw.size() != full - 1))
        violations.push_back("cardinality " + std::to_string(raw.size()) +
                             " not in {2^k-1, 2^k} for k=" + std::to_string(cb.bits));
    if (cb.normalized_values.size() != raw.size()) {
        violations.push_back("normalized/raw size mismatch");
        return violations;
    }
    double max_norm = 0.0;
    for (double v : cb.normalized_values) max_norm = std::max(max_norm, std::abs(v));
    if (max_norm != 1.0) violations.push_back("max |normalized value| is not exactly 1");
    const double m = cb.max_abs_raw();
    if (m > 0.0) {
        for (std::size_t i = 0; i < raw.size(); ++i) {
            const double expected = raw[i] / m;
            if (std::abs(cb.normalized_values[i] - expected) >
                1e-9 * std::max(1.0, std::abs(expected))) {
                violations.push_back("normalized values are not raw / max|raw|");
                break;
            }
        }
    }
    return violations;
}

namespace detail {

inline std::vector<double> pm(std::vector<double> positive) {
    std::vector<double> out;
    for (auto it = positive.rbegin(); it != positive.rend(); ++it) out.push_back(-*it);
    out.push_back(0.0);
    for (double v : positive) out.push_back(v);
    return out;
}

}  // namespace detail

inline const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names = {
        "int3",    "int4",    "int5",    "e2m0",    "e2m1",    "e2m1-i",
        "e2m1-b",  "e2m1-ns", "e2m1-sr", "e2m1-sp", "e3m0",    "apot4",
        "apot4-sp", "nf4",    "sf4-nu3", "sf4-nu4", "sf4-nu5", "sf4-nu6"};
    return names;
}

// Fixed value tables. Lookup-family rows are stored at 3-decimal precision;
// integer, float and APoT rows are exact.
inline Codebook builtin_codebook(const std::string& name) {
    auto iota = [](int lo, int hi) {
        std::vector<double> v;
        for (int i = lo; i < hi; ++i) v.push_back(i);
        return v;
    };
    if (name == "int3") return make_codebook(name, 3, Family::integer, iota(-4, 4));
    if (name == "int4") return make_codebook(name, 4, Family::integer, iota(-8, 8));
    if (name == "int5") return make_codebook(name, 5, Family::integer, iota(-16, 16));
    if (name == "e2m0")
        return make_codebook(name, 3, Family::fp, detail::pm({1, 2, 4}));
    if (name == "e2m1")
        return make_codebook(name, 4, Family::fp, detail::pm({0.5, 1, 1.5, 2, 3, 4, 6}));
    if (name == "e2m1-i")
        return make_codebook(name, 4, Family::fp, detail::pm({0.0625, 1, 1.5, 2, 3, 4, 6}));
    if (name == "e2m1-b")
        return make_codebook(name, 4, Family::fp, detail::pm({0.0625, 2, 3, 4, 6, 8, 12}));
    if (name == "e2m1-ns")
        return make_codebook(name, 4, Family::fp, detail::pm({0.75, 1, 1.5, 2, 3, 4, 6}));
    if (name == "e2m1-sr")
        return make_codebook(name, 4, Family::fp,
                             {-6, -4, -3, -2, -1.5, -1, -0.5, 0, 0.5, 1, 1.5, 2, 3, 4, 6, 8});
    if (name == "e2m1-sp")
        return make_codebook(name, 4, Family::fp,
                             {-6, -4, -3, -2, -1.5, -1, -0.5, 0, 0.5, 1, 1.5, 2, 3, 4, 5, 6});
    if (name == "e3m0")
        return make_codebook(name, 4, Family::fp, detail::pm({0.25, 0.5, 1, 2, 4, 8, 16}));
    if (name == "apot4")
        return make_codebook(name, 4, Family::apot,
                             detail::pm({0.1, 0.2, 0.3, 0.4, 0.6, 0.8, 1.0}));
    if (name == "apot4-sp")
        return make_codebook(name, 4, Family::apot,
                             {-1, -0.8, -0.6, -0.4, -0.3, -0.2, -0.1, 0, 0.1, 0.2, 0.3, 0.4,
                              0.5, 0.6, 0.8, 1.0});
    if (name == "nf4")
        return make_codebook(name, 4, Family::lookup,
                             {-1.000, -0.696, -0.525, -0.395, -0.284, -0.185, -0.091, 0.000,
                              0.080, 0.161, 0.246, 0.338, 0.441, 0.563, 0.723, 1.000});
    if (name == "sf4-nu3")
        return make_codebook(name, 4, Family::lookup,
                             {-1.000, -0.576, -0.404, -0.292, -0.205, -0.131, -0.064, 0.000,
                              0.056, 0.114, 0.176, 0.246, 0.330, 0.439, 0.606, 1.000},
                             3.0);
    if (name == "sf4-nu4")
        return make_codebook(name, 4, Family::lookup,
                             {-1.000, -0.609, -0.436, -0.318, -0.225, -0.145, -0.071, 0.000,
                              0.062, 0.126, 0.194, 0.270, 0.359, 0.472, 0.638, 1.000},
                             4.0);
    if (name == "sf4-nu5")
        return make_codebook(name, 4, Family::lookup,
                             {-1.000, -0.628, -0.455, -0.334, -0.237, -0.153, -0.075, 0.000,
                              0.066, 0.133, 0.205, 0.284, 0.376, 0.491, 0.657, 1.000},
                             5.0);
    if (name == "sf4-nu6")
        return make_codebook(name, 4, Family::lookup,
                             {-1.000, -0.640, -0.467, -0.345, -0.246, -0.158, -0.078, 0.000,
                              0.068, 0.138, 0.212, 0.293, 0.387, 0.504, 0.669, 1.000},
                             6.0);
    std::string valid;
    for (const auto& n : builtin_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown codebook '" + name + "'; valid names: " + valid);
}

namespace detail {

// 2^k probabilities: 2^(k-1) evenly spaced points on [delta, 1/2] and
// 2^(k-1)+1 on [1/2, 1-delta], with the duplicate 1/2 merged. The positive
// side carries one more value than the negative side.
inline std::vector<double> quantile_probability_grid(int bits) {
    const int half = 1 << (bits - 1);
    const double delta =
        0.5 * (std::ldexp(1.0, -(bits + 1)) + 1.0 / ((1 << (bits + 1)) - 2));
    std::vector<double> ps;
    ps.reserve(2 * half);
    for (int i = 0; i + 1 < half; ++i)
        ps.push_back(delta + (0.5 - delta) * i / (half - 1));
    ps.push_back(0.5);
    for (int j = 1; j <= half; ++j)
        ps.push_back(0.5 + (0.5 - delta) * j / half);
    ps.back() = 1.0 - delta;
    return ps;
}

template <class Quantile>
inline Codebook quantile_codebook(std::string name, int bits, Quantile&& quantile,
                                  std::optional<double> nu) {
    require(bits >= 3 && bits <= 5, "supported bit widths are 3, 4 and 5");
    const auto ps = quantile_probability_grid(bits);
    std::vector<double> raw(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) raw[i] = quantile(ps[i]);
    return make_codebook(std::move(name), bits, Family::lookup, std::move(raw), nu);
}

inline std::string format_nu(double nu) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", nu);
    return buf;
}

}  // namespace detail

// Student Float: the quantile grid mapped through the t inverse CDF.
inline Codebook gen_student_float(int bits, double nu) {
    check_nu(nu);
    return detail::quantile_codebook(
        "sf" + std::to_string(bits) + "-nu" + detail::format_nu(nu), bits,
        [nu](double p) { return t_quantile(p, nu); }, nu);
}

// Normal Float: the same grid through the standard normal inverse CDF.
inline Codebook gen_normal_float(int bits) {
    return detail::quantile_codebook("nf" + std::to_string(bits), bits,
                                     [](double p) { return normal_quantile(p); }, {});
}

// Additive powers-of-two: magnitudes are sums taking one element from each
// set, each set holding 0 plus powers of two.
struct ApotSpec {
    std::vector<std::vector<double>> sets;
};

inline Codebook apot_codebook(const ApotSpec& spec, std::string name = "") {
    require(spec.sets.size() >= 1 && spec.sets.size() <= 3, "apot spec needs 1 to 3 sets");
    for (const auto& set : spec.sets) {
        require(!set.empty(), "apot sets must be non-empty");
        bool has_zero = false;
        for (double v : set) {
            if (v == 0.0) {
                has_zero = true;
                continue;
            }
            const double l = std::log2(v);
            require(v > 0.0 && l == std::floor(l), "apot set elements must be 0 or powers of two");
        }
        require(has_zero, "every apot set must contain 0");
    }
    std::vector<double> magnitudes = {0.0};
    for (const auto& set : spec.sets) {
        std::vector<double> next;
        for (double m : magnitudes)
            for (double v : set) next.push_back(m + v);
        magnitudes = std::move(next);
    }
    std::sort(magnitudes.begin(), magnitudes.end());
    magnitudes.erase(std::unique(magnitudes.begin(), magnitudes.end()), magnitudes.end());
    std::vector<double> positive;
    for (double m : magnitudes)
        if (m > 0.0) positive.push_back(m);
    if (name.empty()) name = "apot" + std::to_string(spec.sets.size()) + "s";
    const std::size_t count = 2 * positive.size() + 1;
    int bits = 1;
    while ((std::size_t{1} << bits) < count) ++bits;
    return make_codebook(std::move(name), bits, Family::apot, detail::pm(std::move(positive)));
}

// All distinct variants with n_sets sets drawn from {0, 2^-1, 2^-2, 2^-3, 2^-4}.
// Variants whose sums collide (wasting bitspace) are dropped, and specs that
// produce an identical value set are reported once.
inline std::vector<Codebook> enumerate_apot(int n_sets) {
    require(n_sets >= 1 && n_sets <= 3, "apot enumeration supports 1 to 3 sets");
    static const double pool[4] = {0.5, 0.25, 0.125, 0.0625};
    std::vector<std::vector<double>> subsets;
    for (unsigned mask = 1; mask < 16; ++mask) {
        std::vector<double> set = {0.0};
        for (int b = 0; b < 4; ++b)
            if (mask & (1u << b)) set.push_back(pool[b]);
        std::sort(set.begin(), set.end());
        subsets.push_back(std::move(set));
    }
    std::vector<Codebook> out;
    std::map<std::vector<double>, bool> seen;
    std::vector<std::size_t> choice(n_sets, 0);
    while (true) {
        ApotSpec spec;
        std::size_t product = 1;
        for (int s = 0; s < n_sets; ++s) {
            spec.sets.push_back(subsets[choice[s]]);
            product *= subsets[choice[s]].size();
        }
        std::string name = "apot" + std::to_string(n_sets) + "s";
        for (const auto& set : spec.sets) {
            name += "-";
            for (double v : set)
                if (v > 0.0) name += std::to_string(int(std::round(-std::log2(v))));
        }
        Codebook cb = apot_codebook(spec, name);
        // collision-free iff every sum is distinct
        if (cb.size() == 2 * product - 1 && !seen.count(cb.raw_values)) {
            seen[cb.raw_values] = true;
            out.push_back(std::move(cb));
        }
        int s = n_sets - 1;
        while (s >= 0 && ++choice[s] == subsets.size()) choice[s--] = 0;
        if (s < 0) break;
    }
    return out;
}

enum class SupernormalMode { super_range, super_precision };

// Reassigns the redundant negative-zero slot of a 2^k - 1 value format:
// super-range appends the next magnitude continuing the top-of-range step,
// super-precision fills the widest gap between consecutive positive values
// (ties resolved toward zero).
inline Codebook supernormal_extend(const Codebook& base, SupernormalMode mode) {
    const std::size_t full = std::size_t{1} << base.bits;
    require(base.size() == full - 1,
            "supernormal extension needs a 2^k - 1 value codebook with a free slot");
    std::vector<double> raw = base.raw_values;
    std::string suffix;
    if (mode == SupernormalMode::super_range) {
        require(raw.size() >= 2, "super-range needs at least two values");
        raw.push_back(raw.back() + (raw.back() - raw[raw.size() - 2]));
        suffix = "-sr";
    } else {
        std::vector<double> positive;
        for (double v : raw)
            if (v > 0.0) positive.push_back(v);
        require(positive.size() >= 2, "super-precision needs at least two positive values");
        double max_gap = 0.0;
        for (std::size_t i = 1; i < positive.size(); ++i)
            max_gap = std::max(max_gap, positive[i] - positive[i - 1]);
        std::size_t pick = 0;
        for (std::size_t i = 1; i < positive.size(); ++i) {
            const double gap = positive[i] - positive[i - 1];
            if (gap >= max_gap * (1.0 - 1e-9)) {
                pick = i;
                break;  // first qualifying gap is the one nearest zero
            }
        }
        raw.push_back(0.5 * (positive[pick - 1] + positive[pick]));
        suffix = "-sp";
        std::sort(raw.begin(), raw.end());
    }
    return make_codebook(base.name + suffix, base.bits, base.family, std::move(raw), base.nu);
}

}  // namespace qformat
