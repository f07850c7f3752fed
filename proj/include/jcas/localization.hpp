#ifndef JCAS_LOCALIZATION_HPP
#define JCAS_LOCALIZATION_HPP

/**
 * @file localization.hpp
 * @brief Bi-static localization from AoA + propagation-range estimates.
 *
 * The UE sits at the end of the line-of-sight path: its position is the BS
 * plus the estimated range along the estimated arrival direction.  Every
 * scattered path has an aggregate range r1 + r2 (UE -> scatterer -> BS), so
 * the scatterer lies on a prolate spheroid with foci at the BS and the UE;
 * intersecting that spheroid with the arrival ray at the BS pins it down.
 */

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "jcas/common.hpp"

namespace jcas {

/**
 * @brief Rotation between the global frame and a frame whose +x axis points
 *        along a given direction.
 *
 * Composition R = R_y(pi/2 - el) * R_z(-az) maps unit_from_angles({az, el})
 * onto +x.  to_local / to_global are mutually inverse (the matrix is
 * orthonormal, so the inverse is the transpose).
 */
class FrameRotation {
  public:
    explicit FrameRotation(const AnglePair& x_axis_direction) {
        const double az = x_axis_direction.azimuth;
        const double el = x_axis_direction.elevation;
        Matrix3d rz, ry;
        rz << std::cos(az), std::sin(az), 0.0,  //
            -std::sin(az), std::cos(az), 0.0,   //
            0.0, 0.0, 1.0;
        const double b = kPi / 2.0 - el;
        ry << std::cos(b), 0.0, std::sin(b),  //
            0.0, 1.0, 0.0,                    //
            -std::sin(b), 0.0, std::cos(b);
        rot_ = ry * rz;
    }

    Vector3d to_local(const Vector3d& v) const { return rot_ * v; }
    Vector3d to_global(const Vector3d& v) const { return rot_.transpose() * v; }
    const Matrix3d& matrix() const { return rot_; }

  private:
    Matrix3d rot_;
};

/// One associated (AoA, Doppler, range) triple from the estimation stages.
struct TargetCandidate {
    int aoa_index = -1;
    int dpo_index = -1;
    int range_index = -1;
    AnglePair angle;
    double doppler_hz = 0.0;
    double range_m = 0.0;       ///< propagation (aggregate) range of the path
    double aoa_depth = 0.0;     ///< spectrum values at the respective minima
    double dpo_depth = 0.0;
    double range_depth = 0.0;
};

/// Index of the LoS/UE candidate: the shortest propagation range, since every
/// scattered path is longer than the direct one by the triangle inequality.
inline int identify_ue(const std::vector<TargetCandidate>& candidates) {
    if (candidates.empty()) {
        throw std::invalid_argument("identify_ue: no candidates");
    }
    const auto it = std::min_element(
        candidates.begin(), candidates.end(),
        [](const TargetCandidate& a, const TargetCandidate& b) { return a.range_m < b.range_m; });
    return static_cast<int>(it - candidates.begin());
}

/// UE position from the LoS range and arrival direction.
inline Vector3d locate_ue(const Vector3d& bs_position, const AnglePair& aoa, double range_m) {
    if (range_m <= 0.0) {
        throw std::invalid_argument("locate_ue: range must be positive");
    }
    return bs_position + range_m * unit_from_angles(aoa);
}

/**
 * @brief Scatterer position from its aggregate range and arrival direction.
 *
 * Works in a local frame with the BS at the origin and the UE on +x.  With
 * semi-axes a = aggregate/2, c = |UE - BS|/2, b^2 = a^2 - c^2, the spheroid
 * centred at (c, 0, 0) is (x-c)^2/a^2 + (y^2+z^2)/b^2 = 1.  Substituting the
 * ray x = rho sin el cos az, y = rho sin el sin az, z = rho cos el yields a
 * quadratic along the dominant horizontal coordinate; the root matching the
 * ray's sign is taken.  Returns std::nullopt when the geometry is infeasible
 * (aggregate range not exceeding the BS-UE baseline).
 */
inline std::optional<Vector3d> locate_scatterer(const Vector3d& bs_position,
                                                const Vector3d& ue_position, const AnglePair& aoa,
                                                double aggregate_range) {
    const Vector3d baseline = ue_position - bs_position;
    const double r_ue = baseline.norm();
    if (r_ue <= 0.0) {
        throw std::invalid_argument("locate_scatterer: BS and UE coincide");
    }
    const double a = aggregate_range / 2.0;
    const double c = r_ue / 2.0;
    const double b2 = a * a - c * c;
    if (b2 <= 0.0) return std::nullopt;  // ray cannot reach the spheroid

    const FrameRotation frame(angles_from_unit(baseline));
    const Vector3d dir = frame.to_local(unit_from_angles(aoa));
    const AnglePair local = angles_from_unit(dir);
    const double sin_el = std::sin(local.elevation);
    const double cos_el = std::cos(local.elevation);

    Vector3d p_local;
    if (sin_el < 1e-9) {
        // Ray along the local z axis: x = y = 0 on the spheroid directly.
        const double z = (cos_el >= 0.0 ? 1.0 : -1.0) * b2 / a;
        p_local = Vector3d(0.0, 0.0, z);
    } else {
        const double cos_az = std::cos(local.azimuth);
        const double sin_az = std::sin(local.azimuth);
        const double cot_el = cos_el / sin_el;
        const double a2 = a * a;
        double x = 0.0, y = 0.0;
        if (std::abs(cos_az) >= std::abs(sin_az)) {
            const double t = sin_az / cos_az;  // y = x tan(az)
            const double qa = 1.0 / a2 + (t * t + (1.0 + t * t) * cot_el * cot_el) / b2;
            const double qb = -2.0 * c / a2;
            const double qc = c * c / a2 - 1.0;
            const double disc = std::sqrt(std::max(qb * qb - 4.0 * qa * qc, 0.0));
            x = (cos_az >= 0.0 ? -qb + disc : -qb - disc) / (2.0 * qa);
            y = x * t;
        } else {
            const double t = cos_az / sin_az;  // x = y cot(az)
            const double qa = t * t / a2 + (1.0 + (1.0 + t * t) * cot_el * cot_el) / b2;
            const double qb = -2.0 * c * t / a2;
            const double qc = c * c / a2 - 1.0;
            const double disc = std::sqrt(std::max(qb * qb - 4.0 * qa * qc, 0.0));
            y = (sin_az >= 0.0 ? -qb + disc : -qb - disc) / (2.0 * qa);
            x = y * t;
        }
        const double z = std::hypot(x, y) * cot_el;
        p_local = Vector3d(x, y, z);
    }
    return bs_position + frame.to_global(p_local);
}

}  // namespace jcas

#endif  // JCAS_LOCALIZATION_HPP
