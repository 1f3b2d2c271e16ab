// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "qformat/hwmodel.hpp"
#include "qformat/json_io.hpp"
#include "qformat/profile.hpp"
#include "qformat/quant.hpp"
#include "qformat/tensor.hpp"

namespace qformat {

namespace detail {

inline std::string csv_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace detail

// Resolves a --block style token: a positive integer, "cw" or "tensor".
inline QuantScheme make_scheme(const Codebook& cb, const std::string& block,
                               const std::string& clip) {
    QuantScheme scheme;
    scheme.codebook = cb;
    if (block == "cw") {
        scheme.granularity = Granularity::channelwise;
    } else if (block == "tensor") {
        scheme.granularity = Granularity::tensorwise;
    } else {
        int value = 0;
        const auto res = std::from_chars(block.data(), block.data() + block.size(), value);
        if (res.ec != std::errc{} || res.ptr != block.data() + block.size() || value < 2)
            throw std::invalid_argument("bad block '" + block +
                                        "': expected an integer >= 2, 'cw' or 'tensor'");
        scheme.granularity = Granularity::subchannel;
        scheme.block_size = value;
    }
    if (clip == "mse")
        scheme.clip = ClipMode::mse;
    else if (clip == "none")
        scheme.clip = ClipMode::none;
    else
        throw std::invalid_argument("bad clip mode '" + clip + "': expected none or mse");
    return scheme;
}

// A builtin name or a path to a codebook JSON file.
inline Codebook resolve_codebook(const std::string& name_or_path) {
    for (const auto& n : builtin_names())
        if (n == name_or_path) return builtin_codebook(name_or_path);
    return codebook_from_json(read_text_file(name_or_path));
}

inline QuantReport quantize_to_report(const std::string& tensor_name, const Tensor& tensor,
                                      const QuantScheme& scheme, const std::string& block,
                                      const std::string& clip) {
    const QuantizedTensor qt = quantize(tensor, scheme);
    const Tensor rec = dequantize(qt);
    const ErrorReport err = error_report(tensor, rec, qt);
    QuantReport report;
    report.tensor = tensor_name;
    report.codebook = scheme.codebook.name;
    switch (scheme.granularity) {
        case Granularity::tensorwise:
            report.block = static_cast<long long>(tensor.size());
            break;
        case Granularity::channelwise:
            report.block = static_cast<long long>(tensor.cols);
            break;
        case Granularity::subchannel:
            report.block = scheme.block_size;
            break;
    }
    report.clip = clip;
    report.mse = err.mse;
    report.sqnr_db = err.sqnr_db;
    report.max_abs_err = err.max_abs_err;
    report.bin_histogram = err.bin_histogram;
    report.short_blocks = qt.short_blocks;
    return report;
}

struct SweepRow {
    std::string tensor;
    std::string codebook;
    std::string block;
    std::string clip;
    double mse = 0.0;
    double sqnr_db = 0.0;
    double max_abs_err = 0.0;
    double cv = 0.0;
};

inline unsigned sweep_thread_count(std::size_t cells) {
    unsigned threads = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("QFORMAT_THREADS")) {
        char* end = nullptr;
        const long parsed = std::strtol(env, &end, 10);
        if (end != env && parsed >= 0) {
            if (parsed > 0) threads = static_cast<unsigned>(parsed);
        }
    }
    if (threads == 0) threads = 1;
    return static_cast<unsigned>(std::min<std::size_t>(threads, cells));
}

// Runs the tensors x codebooks x blocks x clips cross-product. Cells execute
// concurrently (QFORMAT_THREADS caps the pool, 0 = auto) and rows come back
// in configuration order.
inline std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
    std::vector<std::pair<std::string, Tensor>> tensors;
    for (const auto& path : cfg.tensors) tensors.emplace_back(path, read_tensor(path));
    std::vector<Codebook> codebooks;
    for (const auto& name : cfg.codebooks) codebooks.push_back(resolve_codebook(name));

    struct Cell {
        std::size_t tensor, codebook, block, clip;
    };
    std::vector<Cell> cells;
    for (std::size_t t = 0; t < tensors.size(); ++t)
        for (std::size_t c = 0; c < codebooks.size(); ++c)
            for (std::size_t b = 0; b < cfg.blocks.size(); ++b)
                for (std::size_t k = 0; k < cfg.clips.size(); ++k)
                    cells.push_back({t, c, b, k});

    std::vector<SweepRow> rows(cells.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            try {
                const Cell& cell = cells[i];
                const auto& [tensor_name, tensor] = tensors[cell.tensor];
                const QuantScheme scheme = make_scheme(
                    codebooks[cell.codebook], cfg.blocks[cell.block], cfg.clips[cell.clip]);
                const QuantizedTensor qt = quantize(tensor, scheme);
                const Tensor rec = dequantize(qt);
                const ErrorReport err = error_report(tensor, rec, qt);
                rows[i] = {tensor_name,
                           scheme.codebook.name,
                           cfg.blocks[cell.block],
                           cfg.clips[cell.clip],
                           err.mse,
                           err.sqnr_db,
                           err.max_abs_err,
                           bin_load_stats(qt)};
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(cells.size());
                return;
            }
        }
    };
    const unsigned thread_count = sweep_thread_count(cells.size());
    if (thread_count <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < thread_count; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "tensor,codebook,block,clip,mse,sqnr_db,max_abs_err,cv\n";
    for (const auto& r : rows) {
        out += r.tensor + "," + r.codebook + "," + r.block + "," + r.clip + "," +
               detail::csv_double(r.mse) + "," + detail::csv_double(r.sqnr_db) + "," +
               detail::csv_double(r.max_abs_err) + "," + detail::csv_double(r.cv) + "\n";
    }
    return out;
}

inline std::string profile_csv(const std::vector<ProfileRow>& rows) {
    std::string out = "tensor,nu,scale,ks_t,sigma,ks_normal,ks_delta\n";
    for (const auto& r : rows) {
        out += r.tensor + "," + detail::csv_double(r.t.nu) + "," +
               detail::csv_double(r.t.scale) + "," + detail::csv_double(r.t.ks) + "," +
               detail::csv_double(r.normal.sigma) + "," + detail::csv_double(r.normal.ks) +
               "," + detail::csv_double(r.ks_delta) + "\n";
    }
    return out;
}

struct QualityRow {
    std::string format;
    double quality = 0.0;
};

// Expects a header line "format,quality".
inline std::vector<QualityRow> parse_quality_csv(const std::string& text) {
    std::vector<QualityRow> rows;
    std::size_t pos = 0;
    bool header = true;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            if (line != "format,quality")
                throw std::runtime_error("quality CSV: expected header 'format,quality'");
            header = false;
            continue;
        }
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("quality CSV: malformed line '" + line + "'");
        QualityRow row;
        row.format = line.substr(0, comma);
        const std::string value = line.substr(comma + 1);
        char* parse_end = nullptr;
        row.quality = std::strtod(value.c_str(), &parse_end);
        if (parse_end == value.c_str())
            throw std::runtime_error("quality CSV: bad quality value '" + value + "'");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("quality CSV: no data rows");
    return rows;
}

// Joins external quality scores with the MAC cost table, computes the chip
// overhead against the INT4 baseline and marks the Pareto front.
inline std::string pareto_csv(const std::vector<QualityRow>& quality) {
    const MacCost baseline = paper_mac_cost("int4");
    std::vector<ParetoPoint> points;
    std::vector<MacCost> costs;
    for (const auto& q : quality) {
        const MacCost cost = paper_mac_cost(q.format);
        costs.push_back(cost);
        points.push_back({q.format, q.quality,
                          chip_overhead(cost.mac_area_um2, baseline.mac_area_um2,
                                        cost.operand_bits, baseline.operand_bits)});
    }
    const auto front = pareto_front(points);
    auto on_front = [&front](const std::string& format) {
        for (const auto& p : front)
            if (p.format == format) return true;
        return false;
    };
    std::string out = "format,quality,mac_area_um2,accum_bits,overhead_pct,on_front\n";
    for (std::size_t i = 0; i < quality.size(); ++i) {
        out += quality[i].format + "," + detail::csv_double(quality[i].quality) + "," +
               detail::csv_double(costs[i].mac_area_um2) + "," +
               std::to_string(costs[i].accum_bits) + "," +
               detail::csv_double(points[i].overhead_pct) + "," +
               (on_front(quality[i].format) ? "1" : "0") + "\n";
    }
    return out;
}

}  // namespace qformat
