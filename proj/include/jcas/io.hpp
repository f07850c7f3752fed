#ifndef JCAS_IO_HPP
#define JCAS_IO_HPP

/**
 * @file io.hpp
 * @brief CSI tensor serialization and the sweep-result CSV writer.
 *
 * Tensor format: one ASCII header line
 *
 *   jcas-csi 1 antennas=<A> subcarriers=<N> packets=<M>\n
 *
 * followed by A*N*M complex samples as little-endian float64 pairs
 * (re, im), antenna index fastest, then subcarrier, then packet --
 * the in-memory order of CsiTensor::data.
 *
 * CSV schema (one header line, then one row per metric):
 *
 *   sweep_name,sweep_value,target_kind,metric,value,trials,case
 */

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "jcas/channel.hpp"

namespace jcas {

namespace detail {

inline void put_le_doubles(std::ostream& out, const double* src, size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(src), static_cast<std::streamsize>(count * 8));
    } else {
        std::vector<char> buf(count * 8);
        for (size_t i = 0; i < count; ++i) {
            const auto bits = std::bit_cast<std::uint64_t>(src[i]);
            for (int b = 0; b < 8; ++b) buf[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
        }
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
}

inline void get_le_doubles(std::istream& in, double* dst, size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(count * 8));
    } else {
        std::vector<char> buf(count * 8);
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        for (size_t i = 0; i < count; ++i) {
            std::uint64_t bits = 0;
            for (int b = 0; b < 8; ++b) {
                bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i * 8 + b]))
                        << (8 * b);
            }
            dst[i] = std::bit_cast<double>(bits);
        }
    }
}

inline int header_field(const std::string& token, const std::string& key) {
    const std::string prefix = key + "=";
    if (token.rfind(prefix, 0) != 0) {
        throw std::runtime_error("csi load: expected '" + key + "=' in header, got '" + token + "'");
    }
    return std::stoi(token.substr(prefix.size()));
}

}  // namespace detail

inline void save_csi(std::ostream& out, const CsiTensor& csi) {
    out << "jcas-csi 1 antennas=" << csi.antennas << " subcarriers=" << csi.subcarriers
        << " packets=" << csi.packets << "\n";
    static_assert(sizeof(Cplx) == 2 * sizeof(double));
    detail::put_le_doubles(out, reinterpret_cast<const double*>(csi.data.data()),
                           csi.data.size() * 2);
    if (!out) throw std::runtime_error("csi save: stream write failed");
}

inline void save_csi(const std::string& path, const CsiTensor& csi) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("csi save: cannot open '" + path + "'");
    save_csi(out, csi);
}

inline CsiTensor load_csi(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("csi load: missing header");
    std::istringstream hs(header);
    std::string magic, version, tok_a, tok_n, tok_m;
    hs >> magic >> version >> tok_a >> tok_n >> tok_m;
    if (magic != "jcas-csi" || version != "1") {
        throw std::runtime_error("csi load: not a jcas-csi v1 stream");
    }
    CsiTensor csi(detail::header_field(tok_a, "antennas"),
                  detail::header_field(tok_n, "subcarriers"),
                  detail::header_field(tok_m, "packets"));
    detail::get_le_doubles(in, reinterpret_cast<double*>(csi.data.data()), csi.data.size() * 2);
    if (!in) throw std::runtime_error("csi load: truncated payload");
    if (in.peek() != std::char_traits<char>::eof()) {
        throw std::runtime_error("csi load: trailing bytes after payload");
    }
    return csi;
}

inline CsiTensor load_csi(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("csi load: cannot open '" + path + "'");
    return load_csi(in);
}

/// One metric row of a sweep result.
struct CsvRow {
    std::string sweep_name;
    double sweep_value = 0.0;
    std::string target_kind;  ///< "ue" | "scatterer" | "all"
    std::string metric;
    double value = 0.0;
    int trials = 0;
    std::string case_name;  ///< "kf" | "plain"
};

inline std::string format_csv_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_csv(std::ostream& out, const std::vector<CsvRow>& rows) {
    out << "sweep_name,sweep_value,target_kind,metric,value,trials,case\n";
    for (const auto& r : rows) {
        out << r.sweep_name << ',' << format_csv_number(r.sweep_value) << ',' << r.target_kind
            << ',' << r.metric << ',' << format_csv_number(r.value) << ',' << r.trials << ','
            << r.case_name << '\n';
    }
    if (!out) throw std::runtime_error("csv write: stream failure");
}

inline void write_csv(const std::string& path, const std::vector<CsvRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("csv write: cannot open '" + path + "'");
    write_csv(out, rows);
}

}  // namespace jcas

#endif  // JCAS_IO_HPP
