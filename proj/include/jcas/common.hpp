#ifndef JCAS_COMMON_HPP
#define JCAS_COMMON_HPP

/**
 * @file common.hpp
 * @brief Shared scalar types, physical constants and small angle/vector helpers.
 */

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace jcas {

using Cplx = std::complex<double>;
using Eigen::Matrix3d;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Speed of light in vacuum [m/s].
inline constexpr double kSpeedOfLight = 299792458.0;

inline constexpr double kPi = std::numbers::pi;
inline constexpr Cplx kJ{0.0, 1.0};

inline constexpr double deg2rad(double d) { return d * kPi / 180.0; }
inline constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

/**
 * @brief Azimuth/elevation pair in radians.
 *
 * Azimuth is measured in the x-y plane from +x (range (-pi, pi]), elevation
 * from the +z axis (0 = zenith, pi/2 = horizon, range (0, pi)).  All angles
 * live in the BS-centred right-handed global frame.
 */
struct AnglePair {
    double azimuth = 0.0;
    double elevation = 0.0;
};

/// Unit direction vector for an angle pair.
inline Vector3d unit_from_angles(const AnglePair& p) {
    const double s = std::sin(p.elevation);
    return {s * std::cos(p.azimuth), s * std::sin(p.azimuth), std::cos(p.elevation)};
}

/// Angle pair of a (not necessarily unit) direction vector.
inline AnglePair angles_from_unit(const Vector3d& v) {
    const double n = v.norm();
    if (n <= 0.0) {
        throw std::invalid_argument("angles_from_unit: zero direction");
    }
    return {std::atan2(v.y(), v.x()), std::acos(std::clamp(v.z() / n, -1.0, 1.0))};
}

/// Angle between two directions in radians (frame independent error measure).
inline double angle_between(const AnglePair& a, const AnglePair& b) {
    const double c = std::clamp(unit_from_angles(a).dot(unit_from_angles(b)), -1.0, 1.0);
    return std::acos(c);
}

/// Draw a circularly symmetric complex Gaussian CN(0, var) sample.
template <class Rng>
inline Cplx draw_cn(Rng& rng, double var) {
    std::normal_distribution<double> n(0.0, std::sqrt(var / 2.0));
    return {n(rng), n(rng)};
}

/// Decibel helpers.
inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace jcas

#endif  // JCAS_COMMON_HPP
