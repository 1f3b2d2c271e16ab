// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "qformat/math_util.hpp"

static_assert(std::endian::native == std::endian::little,
              "tensor file IO assumes a little-endian host");

namespace qformat {

// Dense row-major 2-D array. Rank-1 data is held as a single row.
struct Tensor {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    std::size_t size() const { return data.size(); }
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

namespace detail {

[[noreturn]] inline void format_error(const std::string& path, const std::string& what,
                                      std::size_t offset) {
    throw std::runtime_error(path + ": " + what + " at offset " + std::to_string(offset));
}

inline std::string npy_header_field(const std::string& header, const std::string& key,
                                    const std::string& path, std::size_t header_offset) {
    const std::string quoted = "'" + key + "':";
    const std::size_t pos = header.find(quoted);
    if (pos == std::string::npos)
        format_error(path, "missing header key '" + key + "'", header_offset);
    std::size_t begin = pos + quoted.size();
    while (begin < header.size() && header[begin] == ' ') ++begin;
    std::size_t end = begin;
    if (header[begin] == '\'') {
        end = header.find('\'', begin + 1);
        if (end == std::string::npos)
            format_error(path, "unterminated header value for '" + key + "'", header_offset);
        return header.substr(begin + 1, end - begin - 1);
    }
    if (header[begin] == '(') {
        end = header.find(')', begin);
        if (end == std::string::npos)
            format_error(path, "unterminated header value for '" + key + "'", header_offset);
        return header.substr(begin, end - begin + 1);
    }
    while (end < header.size() && header[end] != ',' && header[end] != '}') ++end;
    return header.substr(begin, end - begin);
}

}  // namespace detail

// NPY v1.0, dtype <f4, C order, rank 1 or 2. Rank-1 files load as 1 x n.
inline Tensor read_tensor(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(path + ": cannot open file");
    char magic[6] = {};
    f.read(magic, 6);
    if (!f || std::memcmp(magic, "\x93NUMPY", 6) != 0)
        detail::format_error(path, "bad magic", 0);
    unsigned char version[2] = {};
    f.read(reinterpret_cast<char*>(version), 2);
    if (!f || version[0] != 1)
        detail::format_error(path, "unsupported format version", 6);
    unsigned char len_bytes[2] = {};
    f.read(reinterpret_cast<char*>(len_bytes), 2);
    if (!f) detail::format_error(path, "truncated header length", 8);
    const std::size_t header_len = len_bytes[0] | (std::size_t(len_bytes[1]) << 8);
    std::string header(header_len, '\0');
    f.read(header.data(), static_cast<std::streamsize>(header_len));
    if (!f) detail::format_error(path, "truncated header", 10);

    const std::string descr = detail::npy_header_field(header, "descr", path, 10);
    if (descr != "<f4")
        detail::format_error(path, "unsupported dtype '" + descr + "' (need '<f4')", 10);
    const std::string order = detail::npy_header_field(header, "fortran_order", path, 10);
    if (order != "False")
        detail::format_error(path, "fortran order is not supported", 10);
    const std::string shape = detail::npy_header_field(header, "shape", path, 10);

    std::vector<std::size_t> dims;
    std::size_t i = 1;
    while (i < shape.size()) {
        while (i < shape.size() && (shape[i] == ' ' || shape[i] == ',')) ++i;
        if (i >= shape.size() || shape[i] == ')') break;
        std::size_t value = 0;
        bool any = false;
        while (i < shape.size() && shape[i] >= '0' && shape[i] <= '9') {
            value = value * 10 + static_cast<std::size_t>(shape[i] - '0');
            ++i;
            any = true;
        }
        if (!any) detail::format_error(path, "malformed shape '" + shape + "'", 10);
        dims.push_back(value);
    }
    if (dims.empty() || dims.size() > 2)
        detail::format_error(path, "rank " + std::to_string(dims.size()) + " not supported", 10);

    Tensor t;
    t.rows = dims.size() == 2 ? dims[0] : 1;
    t.cols = dims.size() == 2 ? dims[1] : dims[0];
    const std::size_t count = t.rows * t.cols;
    const std::size_t payload_offset = 10 + header_len;
    std::vector<float> payload(count);
    f.read(reinterpret_cast<char*>(payload.data()),
           static_cast<std::streamsize>(count * sizeof(float)));
    if (static_cast<std::size_t>(f.gcount()) != count * sizeof(float))
        detail::format_error(path, "payload shorter than the declared shape", payload_offset);
    f.peek();
    if (!f.eof())
        detail::format_error(path, "trailing bytes after payload",
                             payload_offset + count * sizeof(float));
    t.data.assign(payload.begin(), payload.end());
    return t;
}

inline void write_tensor(const std::string& path, const Tensor& t) {
    require(t.rows > 0 && t.cols > 0 && t.data.size() == t.rows * t.cols,
            "write_tensor: tensor shape does not match its payload");
    std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': (" +
                         std::to_string(t.rows) + ", " + std::to_string(t.cols) + "), }";
    const std::size_t unpadded = 10 + header.size() + 1;
    header.append((64 - unpadded % 64) % 64, ' ');
    header.push_back('\n');

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error(path + ": cannot open file for writing");
    f.write("\x93NUMPY\x01\x00", 8);
    const std::size_t header_len = header.size();
    const unsigned char len_bytes[2] = {static_cast<unsigned char>(header_len & 0xff),
                                        static_cast<unsigned char>((header_len >> 8) & 0xff)};
    f.write(reinterpret_cast<const char*>(len_bytes), 2);
    f.write(header.data(), static_cast<std::streamsize>(header.size()));
    std::vector<float> payload(t.data.begin(), t.data.end());
    f.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(float)));
    if (!f) throw std::runtime_error(path + ": write failed");
}

}  // namespace qformat
