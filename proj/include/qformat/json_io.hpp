// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qformat/codebook.hpp"
#include "qformat/quant.hpp"

namespace qformat {

namespace detail {

inline std::string g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline void reject_unknown_fields(const nlohmann::json& j,
                                  const std::vector<std::string>& known,
                                  const std::string& what) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const auto& k : known) ok = ok || it.key() == k;
        if (!ok)
            throw std::runtime_error(what + ": unknown field '" + it.key() + "'");
    }
}

template <class T>
inline T required_field(const nlohmann::json& j, const std::string& key,
                        const std::string& what) {
    if (!j.contains(key))
        throw std::runtime_error(what + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw std::runtime_error(what + ": field '" + key + "' has the wrong type");
    }
}

}  // namespace detail

// Values are serialized with 9 significant digits.
inline std::string codebook_to_json(const Codebook& cb) {
    std::ostringstream out;
    out << "{\n";
    out << "  \"name\": " << nlohmann::json(cb.name).dump() << ",\n";
    out << "  \"bits\": " << cb.bits << ",\n";
    out << "  \"family\": \"" << family_name(cb.family) << "\",\n";
    auto emit_values = [&out](const char* key, const std::vector<double>& vs) {
        out << "  \"" << key << "\": [";
        for (std::size_t i = 0; i < vs.size(); ++i)
            out << (i ? ", " : "") << detail::g9(vs[i]);
        out << "],\n";
    };
    emit_values("raw_values", cb.raw_values);
    emit_values("normalized_values", cb.normalized_values);
    out << "  \"metadata\": {";
    if (cb.nu) out << "\"nu\": " << detail::g9(*cb.nu);
    out << "}\n}\n";
    return out.str();
}

inline Codebook codebook_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("codebook JSON: parse error: ") + e.what());
    }
    detail::reject_unknown_fields(
        j, {"name", "bits", "family", "raw_values", "normalized_values", "metadata"},
        "codebook JSON");
    const auto name = detail::required_field<std::string>(j, "name", "codebook JSON");
    const int bits = detail::required_field<int>(j, "bits", "codebook JSON");
    const auto family = family_from_name(
        detail::required_field<std::string>(j, "family", "codebook JSON"));
    const auto raw =
        detail::required_field<std::vector<double>>(j, "raw_values", "codebook JSON");
    const auto stored_norm = detail::required_field<std::vector<double>>(
        j, "normalized_values", "codebook JSON");
    std::optional<double> nu;
    if (j.contains("metadata")) {
        const auto& meta = j.at("metadata");
        detail::reject_unknown_fields(meta, {"nu"}, "codebook JSON metadata");
        if (meta.contains("nu")) nu = meta.at("nu").get<double>();
    }
    Codebook cb = make_codebook(name, bits, family, raw, nu);
    if (stored_norm.size() != cb.normalized_values.size())
        throw std::runtime_error("codebook JSON: normalized_values length mismatch");
    for (std::size_t i = 0; i < stored_norm.size(); ++i)
        if (std::abs(stored_norm[i] - cb.normalized_values[i]) > 1e-6)
            throw std::runtime_error(
                "codebook JSON: normalized_values disagree with raw_values");
    const auto violations = validate(cb);
    if (!violations.empty())
        throw std::runtime_error("codebook JSON: invalid codebook: " + violations.front());
    return cb;
}

struct QuantReport {
    std::string tensor;
    std::string codebook;
    long long block = 0;
    std::string clip;
    double mse = 0.0;
    double sqnr_db = 0.0;
    double max_abs_err = 0.0;
    std::vector<std::uint64_t> bin_histogram;
    bool short_blocks = false;
};

inline std::string report_to_json(const QuantReport& r) {
    nlohmann::json j;
    j["schema"] = 1;
    j["tensor"] = r.tensor;
    j["codebook"] = r.codebook;
    j["block"] = r.block;
    j["clip"] = r.clip;
    j["mse"] = r.mse;
    if (std::isfinite(r.sqnr_db))
        j["sqnr_db"] = r.sqnr_db;
    else
        j["sqnr_db"] = nullptr;  // +inf sentinel for a zero-error reconstruction
    j["max_abs_err"] = r.max_abs_err;
    j["bin_histogram"] = r.bin_histogram;
    j["short_blocks"] = r.short_blocks;
    return j.dump(2) + "\n";
}

inline QuantReport report_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("report JSON: parse error: ") + e.what());
    }
    detail::reject_unknown_fields(j,
                                  {"schema", "tensor", "codebook", "block", "clip", "mse",
                                   "sqnr_db", "max_abs_err", "bin_histogram", "short_blocks"},
                                  "report JSON");
    if (detail::required_field<int>(j, "schema", "report JSON") != 1)
        throw std::runtime_error("report JSON: unsupported schema version");
    QuantReport r;
    r.tensor = detail::required_field<std::string>(j, "tensor", "report JSON");
    r.codebook = detail::required_field<std::string>(j, "codebook", "report JSON");
    r.block = detail::required_field<long long>(j, "block", "report JSON");
    r.clip = detail::required_field<std::string>(j, "clip", "report JSON");
    r.mse = detail::required_field<double>(j, "mse", "report JSON");
    if (j.contains("sqnr_db") && j.at("sqnr_db").is_null())
        r.sqnr_db = std::numeric_limits<double>::infinity();
    else
        r.sqnr_db = detail::required_field<double>(j, "sqnr_db", "report JSON");
    r.max_abs_err = detail::required_field<double>(j, "max_abs_err", "report JSON");
    r.bin_histogram =
        detail::required_field<std::vector<std::uint64_t>>(j, "bin_histogram", "report JSON");
    r.short_blocks = detail::required_field<bool>(j, "short_blocks", "report JSON");
    return r;
}

// One sweep cell per (tensor, codebook, block, clip) combination.
struct SweepConfig {
    std::vector<std::string> tensors;
    std::vector<std::string> codebooks;
    std::vector<std::string> blocks;  // integer literal, "cw" or "tensor"
    std::vector<std::string> clips;   // "none" or "mse"
    std::string output;
    std::uint64_t seed = 0;
};

inline SweepConfig parse_sweep_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("sweep config: parse error: ") + e.what());
    }
    detail::reject_unknown_fields(
        j, {"schema", "tensors", "codebooks", "blocks", "clips", "output", "seed"},
        "sweep config");
    if (detail::required_field<int>(j, "schema", "sweep config") != 1)
        throw std::runtime_error("sweep config: unsupported schema version");
    SweepConfig cfg;
    cfg.tensors = detail::required_field<std::vector<std::string>>(j, "tensors", "sweep config");
    cfg.codebooks =
        detail::required_field<std::vector<std::string>>(j, "codebooks", "sweep config");
    if (!j.contains("blocks") || !j.at("blocks").is_array())
        throw std::runtime_error("sweep config: missing field 'blocks'");
    for (const auto& b : j.at("blocks")) {
        if (b.is_number_integer())
            cfg.blocks.push_back(std::to_string(b.get<long long>()));
        else if (b.is_string())
            cfg.blocks.push_back(b.get<std::string>());
        else
            throw std::runtime_error("sweep config: field 'blocks' must hold ints or strings");
    }
    cfg.clips = detail::required_field<std::vector<std::string>>(j, "clips", "sweep config");
    if (j.contains("output"))
        cfg.output = detail::required_field<std::string>(j, "output", "sweep config");
    if (!j.contains("seed") || !j.at("seed").is_number_unsigned())
        throw std::runtime_error("sweep config: field 'seed' (unsigned integer) is mandatory");
    cfg.seed = j.at("seed").get<std::uint64_t>();
    if (cfg.tensors.empty()) throw std::runtime_error("sweep config: field 'tensors' is empty");
    if (cfg.codebooks.empty())
        throw std::runtime_error("sweep config: field 'codebooks' is empty");
    if (cfg.blocks.empty()) throw std::runtime_error("sweep config: field 'blocks' is empty");
    if (cfg.clips.empty()) throw std::runtime_error("sweep config: field 'clips' is empty");
    for (const auto& c : cfg.clips)
        if (c != "none" && c != "mse")
            throw std::runtime_error("sweep config: field 'clips' entries must be none|mse");
    return cfg;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(path + ": cannot open file");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error(path + ": cannot open file for writing");
    f << text;
    if (!f) throw std::runtime_error(path + ": write failed");
}

}  // namespace qformat
