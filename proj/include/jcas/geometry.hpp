#ifndef JCAS_GEOMETRY_HPP
#define JCAS_GEOMETRY_HPP

/**
 * @file geometry.hpp
 * @brief Scene description, UPA steering vectors and per-path parameter derivation.
 *
 * Everything here is deterministic geometry: array responses, bi-static path
 * lengths, arrival/departure angles, aggregate Doppler shifts and the
 * deterministic part of the path gains.  Random reflection coefficients and
 * noise live in channel.hpp.
 */

#include <vector>

#include "jcas/common.hpp"

namespace jcas {

/**
 * @brief Uniform planar array lying in the local x-y plane.
 *
 * Element (p, q) sits at offset (p * spacing, q * spacing, 0), p = 0..rows-1,
 * q = 0..cols-1.  Steering entries are ordered row-major with p as the outer
 * index, i.e. entry index p * cols + q.
 */
struct UpaGeometry {
    int rows = 1;          ///< P, elements along x
    int cols = 1;          ///< Q, elements along y
    double spacing = 0.0;  ///< d_a, inter-element spacing [m]
    double carrier_hz = 0.0;

    int size() const { return rows * cols; }
    double wavelength() const { return kSpeedOfLight / carrier_hz; }

    /// Convenience factory with half-wavelength spacing.
    static UpaGeometry half_wavelength(int rows, int cols, double carrier_hz) {
        UpaGeometry g;
        g.rows = rows;
        g.cols = cols;
        g.carrier_hz = carrier_hz;
        g.spacing = 0.5 * kSpeedOfLight / carrier_hz;
        return g;
    }
};

/**
 * @brief Array response for a plane wave from direction (azimuth, elevation).
 *
 * Entry (p, q) = exp(-j (2 pi / lambda) d_a (p cos(az) sin(el) + q sin(az) sin(el))).
 * At elevation 0 (zenith) the response degenerates to all-ones and azimuth is
 * undefined; callers searching over angles must keep elevation inside (0, pi).
 */
inline VectorXcd steering_vector(const UpaGeometry& g, const AnglePair& angle) {
    if (g.rows < 1 || g.cols < 1) {
        throw std::invalid_argument("steering_vector: empty array");
    }
    if (g.carrier_hz <= 0.0) {
        throw std::invalid_argument("steering_vector: carrier frequency must be positive");
    }
    const double kappa = 2.0 * kPi * g.spacing / g.wavelength();
    const double ux = std::cos(angle.azimuth) * std::sin(angle.elevation);
    const double uy = std::sin(angle.azimuth) * std::sin(angle.elevation);
    VectorXcd a(g.size());
    for (int p = 0; p < g.rows; ++p) {
        for (int q = 0; q < g.cols; ++q) {
            const double phase = -kappa * (p * ux + q * uy);
            a(p * g.cols + q) = Cplx{std::cos(phase), std::sin(phase)};
        }
    }
    return a;
}

/// Point scatterer with its reflection-coefficient variance sigma^2_{C beta}.
struct Scatterer {
    Vector3d position = Vector3d::Zero();
    Vector3d velocity = Vector3d::Zero();  ///< [m/s]
    double reflection_var = 1.0;
};

/// Static BS + mobile UE + scatterers, all positions in global coordinates [m].
struct SceneConfig {
    Vector3d bs_position = Vector3d::Zero();
    UpaGeometry bs_array;
    Vector3d ue_position = Vector3d::Zero();
    Vector3d ue_velocity = Vector3d::Zero();  ///< [m/s]
    UpaGeometry ue_array;
    std::vector<Scatterer> scatterers;
};

/**
 * @brief Derived parameters of one propagation path (LoS or single-bounce NLoS).
 *
 * @c gain is the deterministic amplitude factor; NLoS paths are additionally
 * multiplied by a random reflection coefficient when the channel is simulated.
 * Doppler uses the closing-positive convention: a shrinking path length gives
 * a positive Doppler shift.
 */
struct PathParams {
    bool is_los = true;
    int scatterer_index = -1;      ///< -1 for LoS
    double aggregate_range = 0.0;  ///< sum of path segment lengths [m]
    double delay = 0.0;            ///< aggregate_range / c [s]
    double doppler_hz = 0.0;       ///< aggregate Doppler over all segments
    AnglePair aoa;                 ///< arrival at the BS, global frame
    AnglePair aod;                 ///< departure at the UE, global frame
    double gain = 0.0;             ///< deterministic |b| factor
    double reflection_var = 0.0;   ///< sigma^2_{C beta} (NLoS only)
};

/// Free-space LoS amplitude sqrt(lambda^2 / (4 pi r)^2).
inline double path_gain_los(double wavelength, double range) {
    if (range <= 0.0) {
        throw std::invalid_argument("path_gain_los: range must be positive");
    }
    return wavelength / (4.0 * kPi * range);
}

/// Deterministic NLoS amplitude sqrt(lambda^2 / ((4 pi)^3 r1^2 r2^2)).
inline double path_gain_nlos(double wavelength, double r1, double r2) {
    if (r1 <= 0.0 || r2 <= 0.0) {
        throw std::invalid_argument("path_gain_nlos: segment lengths must be positive");
    }
    return wavelength / (std::pow(4.0 * kPi, 1.5) * r1 * r2);
}

namespace detail {

/// Doppler contribution of one segment, closing-positive: -(d|p-q|/dt)/lambda.
inline double segment_doppler(const Vector3d& p, const Vector3d& vp, const Vector3d& q,
                              const Vector3d& vq, double wavelength) {
    const Vector3d d = p - q;
    const double r = d.norm();
    if (r <= 0.0) {
        throw std::invalid_argument("segment_doppler: colocated endpoints");
    }
    const double range_rate = d.dot(vp - vq) / r;
    return -range_rate / wavelength;
}

}  // namespace detail

/**
 * @brief Expand a scene into per-path parameters (LoS first, then scatterers
 *        in their configured order).
 *
 * Angles are expressed in the BS-centred global frame; the AoD uses the same
 * axis orientation seen from the UE.  Throws if any two involved endpoints
 * coincide.
 */
inline std::vector<PathParams> derive_paths(const SceneConfig& scene) {
    const double lambda = scene.bs_array.wavelength();
    const Vector3d bs_static = Vector3d::Zero();
    std::vector<PathParams> paths;
    paths.reserve(1 + scene.scatterers.size());

    // LoS UE -> BS
    {
        PathParams p;
        p.is_los = true;
        const Vector3d d = scene.ue_position - scene.bs_position;
        const double r = d.norm();
        if (r <= 0.0) {
            throw std::invalid_argument("derive_paths: UE colocated with BS");
        }
        p.aggregate_range = r;
        p.delay = r / kSpeedOfLight;
        p.doppler_hz = detail::segment_doppler(scene.ue_position, scene.ue_velocity,
                                               scene.bs_position, bs_static, lambda);
        p.aoa = angles_from_unit(d);
        p.aod = angles_from_unit(-d);
        p.gain = path_gain_los(lambda, r);
        paths.push_back(p);
    }

    for (int k = 0; k < static_cast<int>(scene.scatterers.size()); ++k) {
        const Scatterer& s = scene.scatterers[k];
        PathParams p;
        p.is_los = false;
        p.scatterer_index = k;
        const Vector3d d1 = s.position - scene.ue_position;       // UE -> scatterer
        const Vector3d d2 = s.position - scene.bs_position;       // BS -> scatterer
        const double r1 = d1.norm();
        const double r2 = d2.norm();
        if (r1 <= 0.0 || r2 <= 0.0) {
            throw std::invalid_argument("derive_paths: scatterer colocated with endpoint");
        }
        p.aggregate_range = r1 + r2;
        p.delay = p.aggregate_range / kSpeedOfLight;
        p.doppler_hz =
            detail::segment_doppler(scene.ue_position, scene.ue_velocity, s.position,
                                    s.velocity, lambda) +
            detail::segment_doppler(s.position, s.velocity, scene.bs_position, bs_static,
                                    lambda);
        p.aoa = angles_from_unit(d2);
        p.aod = angles_from_unit(d1);
        p.gain = path_gain_nlos(lambda, r1, r2);
        p.reflection_var = s.reflection_var;
        paths.push_back(p);
    }
    return paths;
}

}  // namespace jcas

#endif  // JCAS_GEOMETRY_HPP
