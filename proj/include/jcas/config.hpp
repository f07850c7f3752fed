#ifndef JCAS_CONFIG_HPP
#define JCAS_CONFIG_HPP

/**
 * @file config.hpp
 * @brief INI experiment configuration: [scene], [ofdm], [clock], [sweep],
 *        [search] sections.
 *
 * Values holding several numbers are whitespace-separated.  The `scatterer`
 * key may repeat, one entry per scatterer, each carrying a position and an
 * optional velocity (km/h) and reflection variance.  Velocities are entered
 * in km/h and converted on load; everything else is SI.
 *
 * Example:
 * @code{.ini}
 *   [scene]
 *   carrier_hz     = 28e9
 *   bs_position    = 50 4.75 7
 *   bs_array       = 8 8
 *   ue_position    = 140 0 2
 *   ue_velocity_kmh = -40 0 0
 *   scatterer      = 60 3 3 0 0 0 10
 *
 *   [ofdm]
 *   subcarriers = 256
 *   ...
 * @endcode
 */

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "jcas/channel.hpp"
#include "jcas/geometry.hpp"
#include "jcas/subspace.hpp"

namespace jcas {

namespace detail {

inline std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::vector<double> parse_numbers(const std::string& value, const std::string& key) {
    std::istringstream iss(value);
    std::vector<double> out;
    double v = 0.0;
    while (iss >> v) out.push_back(v);
    std::string rest;
    if (!out.empty() && (iss >> rest)) {
        throw std::invalid_argument("config: trailing junk in value of '" + key + "'");
    }
    if (out.empty()) {
        throw std::invalid_argument("config: expected numbers in value of '" + key + "'");
    }
    return out;
}

inline double parse_scalar(const std::string& value, const std::string& key) {
    const auto v = parse_numbers(value, key);
    if (v.size() != 1) {
        throw std::invalid_argument("config: '" + key + "' takes a single number");
    }
    return v[0];
}

inline Vector3d parse_vec3(const std::string& value, const std::string& key) {
    const auto v = parse_numbers(value, key);
    if (v.size() != 3) {
        throw std::invalid_argument("config: '" + key + "' takes three numbers");
    }
    return Vector3d(v[0], v[1], v[2]);
}

}  // namespace detail

/// Raw INI content: sections in file order, duplicate keys preserved.
struct IniSection {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
};

inline std::vector<IniSection> parse_ini(std::istream& in) {
    std::vector<IniSection> sections;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw std::invalid_argument("config: unterminated section header at line " +
                                            std::to_string(lineno));
            }
            sections.push_back({detail::trim(line.substr(1, line.size() - 2)), {}});
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config: expected 'key = value' at line " +
                                        std::to_string(lineno));
        }
        if (sections.empty()) {
            throw std::invalid_argument("config: key before any section at line " +
                                        std::to_string(lineno));
        }
        sections.back().entries.emplace_back(detail::trim(line.substr(0, eq)),
                                             detail::trim(line.substr(eq + 1)));
    }
    return sections;
}

/// Monte-Carlo sweep description.
struct SweepSpec {
    std::string axis = "snr_db";        ///< snr_db | tx_power | timing_std_ns | cfo_std_hz | array_size
    std::vector<double> values;         ///< one sweep point per entry
    int trials = 1;                     ///< Monte-Carlo trials per sweep point
    unsigned int base_seed = 1;         ///< first word of every per-trial seed sequence
    std::vector<std::string> cases{"kf"};  ///< processing cases: "kf" and/or "plain"
};

/// Spectrum-search window/grid settings, in degrees for the angles.
struct SearchSettings {
    double azimuth_lo_deg = -180.0;
    double azimuth_hi_deg = 180.0;
    double elevation_lo_deg = 1.0;
    double elevation_hi_deg = 90.0;
    int azimuth_grid = 64;
    int elevation_grid = 64;
    int doppler_grid = 256;
    int range_grid = 512;

    SearchConfig aoa_search() const {
        SearchConfig cfg = SearchConfig::aoa_defaults();
        cfg.lo = {deg2rad(azimuth_lo_deg), deg2rad(elevation_lo_deg)};
        cfg.hi = {deg2rad(azimuth_hi_deg), deg2rad(elevation_hi_deg)};
        cfg.grid = {azimuth_grid, elevation_grid};
        return cfg;
    }
    SearchConfig doppler_search(double packet_interval) const {
        SearchConfig cfg = SearchConfig::doppler_defaults(packet_interval);
        cfg.grid[0] = doppler_grid;
        return cfg;
    }
    SearchConfig range_search(double subcarrier_spacing) const {
        SearchConfig cfg = SearchConfig::range_defaults(subcarrier_spacing);
        cfg.grid[0] = range_grid;
        return cfg;
    }
};

/// Everything one experiment needs; filled from an INI file.
struct ExperimentConfig {
    SceneConfig scene;
    OfdmConfig ofdm;
    ClockModel clock;
    SweepSpec sweep;
    SearchSettings search;
};

namespace detail {

constexpr double kmh_to_ms(double v) { return v / 3.6; }

inline void apply_scene(const IniSection& sec, SceneConfig& scene) {
    double carrier_hz = 0.0;
    int bs_rows = 1, bs_cols = 1, ue_rows = 1, ue_cols = 1;
    std::vector<std::vector<double>> scatterers;
    for (const auto& [key, value] : sec.entries) {
        if (key == "carrier_hz") {
            carrier_hz = parse_scalar(value, key);
        } else if (key == "bs_position") {
            scene.bs_position = parse_vec3(value, key);
        } else if (key == "bs_array") {
            const auto v = parse_numbers(value, key);
            if (v.size() != 2) throw std::invalid_argument("config: 'bs_array' takes rows cols");
            bs_rows = static_cast<int>(v[0]);
            bs_cols = static_cast<int>(v[1]);
        } else if (key == "ue_position") {
            scene.ue_position = parse_vec3(value, key);
        } else if (key == "ue_velocity_kmh") {
            scene.ue_velocity = parse_vec3(value, key).unaryExpr([](double v) { return kmh_to_ms(v); });
        } else if (key == "ue_array") {
            const auto v = parse_numbers(value, key);
            if (v.size() != 2) throw std::invalid_argument("config: 'ue_array' takes rows cols");
            ue_rows = static_cast<int>(v[0]);
            ue_cols = static_cast<int>(v[1]);
        } else if (key == "scatterer") {
            const auto v = parse_numbers(value, key);
            if (v.size() != 3 && v.size() != 6 && v.size() != 7) {
                throw std::invalid_argument(
                    "config: 'scatterer' takes x y z [vx vy vz [reflection_var]]");
            }
            scatterers.push_back(v);
        } else {
            throw std::invalid_argument("config: unknown [scene] key '" + key + "'");
        }
    }
    if (carrier_hz <= 0.0) {
        throw std::invalid_argument("config: [scene] requires a positive carrier_hz");
    }
    scene.bs_array = UpaGeometry::half_wavelength(bs_rows, bs_cols, carrier_hz);
    scene.ue_array = UpaGeometry::half_wavelength(ue_rows, ue_cols, carrier_hz);
    for (const auto& v : scatterers) {
        Scatterer s;
        s.position = Vector3d(v[0], v[1], v[2]);
        if (v.size() >= 6) s.velocity = Vector3d(kmh_to_ms(v[3]), kmh_to_ms(v[4]), kmh_to_ms(v[5]));
        if (v.size() == 7) s.reflection_var = v[6];
        scene.scatterers.push_back(s);
    }
}

inline void apply_ofdm(const IniSection& sec, OfdmConfig& ofdm) {
    for (const auto& [key, value] : sec.entries) {
        if (key == "subcarriers") {
            ofdm.subcarriers = static_cast<int>(parse_scalar(value, key));
        } else if (key == "packets") {
            ofdm.packets = static_cast<int>(parse_scalar(value, key));
        } else if (key == "symbols_per_packet") {
            ofdm.symbols_per_packet = static_cast<int>(parse_scalar(value, key));
        } else if (key == "subcarrier_spacing") {
            ofdm.subcarrier_spacing = parse_scalar(value, key);
        } else if (key == "tx_power") {
            ofdm.tx_power = parse_scalar(value, key);
        } else if (key == "noise_power") {
            ofdm.noise_power = parse_scalar(value, key);
        } else {
            throw std::invalid_argument("config: unknown [ofdm] key '" + key + "'");
        }
    }
}

inline void apply_clock(const IniSection& sec, ClockModel& clock) {
    for (const auto& [key, value] : sec.entries) {
        if (key == "timing_std") {
            clock.timing_std = parse_scalar(value, key);
        } else if (key == "cfo_std") {
            clock.cfo_std = parse_scalar(value, key);
        } else {
            throw std::invalid_argument("config: unknown [clock] key '" + key + "'");
        }
    }
}

inline void apply_sweep(const IniSection& sec, SweepSpec& sweep) {
    for (const auto& [key, value] : sec.entries) {
        if (key == "axis") {
            sweep.axis = value;
        } else if (key == "values") {
            sweep.values = parse_numbers(value, key);
        } else if (key == "trials") {
            sweep.trials = static_cast<int>(parse_scalar(value, key));
        } else if (key == "base_seed") {
            sweep.base_seed = static_cast<unsigned int>(parse_scalar(value, key));
        } else if (key == "cases") {
            std::istringstream iss(value);
            sweep.cases.clear();
            std::string c;
            while (iss >> c) {
                if (c != "kf" && c != "plain") {
                    throw std::invalid_argument("config: unknown case '" + c + "'");
                }
                sweep.cases.push_back(c);
            }
            if (sweep.cases.empty()) {
                throw std::invalid_argument("config: 'cases' must name at least one case");
            }
        } else {
            throw std::invalid_argument("config: unknown [sweep] key '" + key + "'");
        }
    }
}

inline void apply_search(const IniSection& sec, SearchSettings& search) {
    for (const auto& [key, value] : sec.entries) {
        if (key == "azimuth_deg") {
            const auto v = parse_numbers(value, key);
            if (v.size() != 2) throw std::invalid_argument("config: 'azimuth_deg' takes lo hi");
            search.azimuth_lo_deg = v[0];
            search.azimuth_hi_deg = v[1];
        } else if (key == "elevation_deg") {
            const auto v = parse_numbers(value, key);
            if (v.size() != 2) throw std::invalid_argument("config: 'elevation_deg' takes lo hi");
            search.elevation_lo_deg = v[0];
            search.elevation_hi_deg = v[1];
        } else if (key == "aoa_grid") {
            const auto v = parse_numbers(value, key);
            if (v.size() != 2) throw std::invalid_argument("config: 'aoa_grid' takes az el");
            search.azimuth_grid = static_cast<int>(v[0]);
            search.elevation_grid = static_cast<int>(v[1]);
        } else if (key == "doppler_grid") {
            search.doppler_grid = static_cast<int>(parse_scalar(value, key));
        } else if (key == "range_grid") {
            search.range_grid = static_cast<int>(parse_scalar(value, key));
        } else {
            throw std::invalid_argument("config: unknown [search] key '" + key + "'");
        }
    }
}

}  // namespace detail

inline ExperimentConfig load_experiment_config(std::istream& in) {
    ExperimentConfig cfg;
    bool saw_scene = false;
    for (const auto& sec : parse_ini(in)) {
        if (sec.name == "scene") {
            detail::apply_scene(sec, cfg.scene);
            saw_scene = true;
        } else if (sec.name == "ofdm") {
            detail::apply_ofdm(sec, cfg.ofdm);
        } else if (sec.name == "clock") {
            detail::apply_clock(sec, cfg.clock);
        } else if (sec.name == "sweep") {
            detail::apply_sweep(sec, cfg.sweep);
        } else if (sec.name == "search") {
            detail::apply_search(sec, cfg.search);
        } else {
            throw std::invalid_argument("config: unknown section [" + sec.name + "]");
        }
    }
    if (!saw_scene) {
        throw std::invalid_argument("config: missing [scene] section");
    }
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("config: cannot open '" + path + "'");
    }
    return load_experiment_config(in);
}

}  // namespace jcas

#endif  // JCAS_CONFIG_HPP
