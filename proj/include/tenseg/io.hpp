#pragma once

// File formats: TSR1 binary tensors and plain CSV matrices / change-point lists.
//
// TSR1 layout (all little-endian): "TSR1", u32 K, K x u64 extents, then the
// values as f64 in vec order (mode 1 fastest).

#include "tenseg/tensor.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tenseg {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

template <class T>
T byteswap_if_big(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

template <class T>
void put_le(std::ostream& os, T v) {
    v = byteswap_if_big(v);
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw IoError("TSR1: truncated file");
    return byteswap_if_big(v);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        std::size_t i = 0;
        while (i < cell.size() && cell[i] == ' ') ++i;
        cells.push_back(cell.substr(i));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    std::size_t used = 0;
    try {
        out = std::stod(s, &used);
    } catch (const std::exception&) {
        return false;
    }
    return used == s.size();
}

}  // namespace detail

inline void write_tsr1(std::ostream& os, const DenseTensor& t) {
    os.write("TSR1", 4);
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(t.order()));
    for (std::size_t n : t.shape()) detail::put_le<std::uint64_t>(os, n);
    for (double v : t.data()) detail::put_le<double>(os, v);
    if (!os) throw IoError("TSR1: write failed");
}

inline DenseTensor read_tsr1(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "TSR1", 4) != 0) throw IoError("TSR1: bad magic");
    const auto K = detail::get_le<std::uint32_t>(is);
    if (K == 0 || K > 64) throw IoError("TSR1: unsupported mode count " + std::to_string(K));
    Shape shape(K);
    std::uint64_t m = 1;
    for (auto& n : shape) {
        const auto e = detail::get_le<std::uint64_t>(is);
        if (e == 0) throw IoError("TSR1: zero extent");
        if (m > std::numeric_limits<std::uint64_t>::max() / e) throw IoError("TSR1: size overflow");
        m *= e;
        n = static_cast<std::size_t>(e);
    }
    std::vector<double> data(static_cast<std::size_t>(m));
    for (auto& v : data) v = detail::get_le<double>(is);
    return DenseTensor(std::move(shape), std::move(data));
}

inline void write_tsr1(const std::filesystem::path& path, const DenseTensor& t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    write_tsr1(os, t);
}

inline DenseTensor read_tsr1(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    return read_tsr1(is);
}

/// Numeric CSV, one record per line. A first line that does not parse as
/// numbers is taken as a header and skipped. Returns records × columns.
inline Matrix read_csv_matrix(std::istream& is) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        std::vector<double> row(cells.size());
        bool ok = true;
        for (std::size_t i = 0; i < cells.size() && ok; ++i) ok = detail::parse_double(cells[i], row[i]);
        if (!ok) {
            if (rows.empty() && lineno == 1) continue;
            throw IoError("CSV line " + std::to_string(lineno) + ": non-numeric field");
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw IoError("CSV line " + std::to_string(lineno) + ": ragged row");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError("CSV: no data rows");
    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return out;
}

inline Matrix read_csv_matrix(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    return read_csv_matrix(is);
}

/// Full-precision CSV with an optional header line.
inline void write_csv_matrix(std::ostream& os, const Matrix& m, const std::string& header = {}) {
    if (!header.empty()) os << header << '\n';
    os << std::setprecision(17);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c > 0) os << ',';
            os << m(r, c);
        }
        os << '\n';
    }
    if (!os) throw IoError("CSV: write failed");
}

inline void write_csv_matrix(const std::filesystem::path& path, const Matrix& m, const std::string& header = {}) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    write_csv_matrix(os, m, header);
}

/// Time series CSV (one row per time point, one column per variable) as a
/// p × T matrix.
inline Matrix read_series_csv(const std::filesystem::path& path) { return read_csv_matrix(path).transpose(); }

inline void write_truth_csv(std::ostream& os, const std::vector<std::size_t>& cps) {
    os << "change_point\n";
    for (std::size_t c : cps) os << c << '\n';
    if (!os) throw IoError("truth CSV: write failed");
}

inline void write_truth_csv(const std::filesystem::path& path, const std::vector<std::size_t>& cps) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    write_truth_csv(os, cps);
}

/// Reads a single-column list of change-points, with or without a header.
inline std::vector<std::size_t> read_truth_csv(std::istream& is) {
    std::vector<std::size_t> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string cell = detail::split_csv_line(line).front();
        double v = 0.0;
        if (!detail::parse_double(cell, v)) {
            if (lineno == 1) continue;
            throw IoError("truth CSV line " + std::to_string(lineno) + ": not a number");
        }
        if (v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v)))
            throw IoError("truth CSV line " + std::to_string(lineno) + ": not a nonnegative integer");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

inline std::vector<std::size_t> read_truth_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    return read_truth_csv(is);
}

}  // namespace tenseg
