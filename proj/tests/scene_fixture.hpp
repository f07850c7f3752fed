#ifndef JCAS_TESTS_SCENE_FIXTURE_HPP
#define JCAS_TESTS_SCENE_FIXTURE_HPP

/**
 * @file scene_fixture.hpp
 * @brief Reference urban-micro scene shared by the tests: 28 GHz carrier,
 *        8x8 half-wavelength BS panel at (50, 4.75, 7), a single-antenna UE
 *        at (140, 0, 2) driving along -x at 40 km/h, and one static
 *        scatterer at (60, 3, 3) with reflection variance 10.
 *
 * The frozen ground-truth constants below were computed independently from
 * the scene geometry and are asserted against, not derived from, the library.
 */

#include "jcas/channel.hpp"
#include "jcas/config.hpp"
#include "jcas/geometry.hpp"

namespace jcas_test {

inline jcas::SceneConfig reference_scene() {
    jcas::SceneConfig s;
    s.bs_position = {50.0, 4.75, 7.0};
    s.bs_array = jcas::UpaGeometry::half_wavelength(8, 8, 28e9);
    s.ue_position = {140.0, 0.0, 2.0};
    s.ue_velocity = {-40.0 / 3.6, 0.0, 0.0};
    s.ue_array = jcas::UpaGeometry::half_wavelength(1, 1, 28e9);
    jcas::Scatterer sc;
    sc.position = {60.0, 3.0, 3.0};
    sc.reflection_var = 10.0;
    s.scatterers.push_back(sc);
    return s;
}

inline jcas::OfdmConfig reference_ofdm() {
    jcas::OfdmConfig o;
    o.subcarriers = 256;
    o.packets = 64;
    o.symbols_per_packet = 7;
    o.subcarrier_spacing = 480e3;
    o.tx_power = 0.34531;  // calibrates the reference link to an 8 dB uplink SNR
    o.noise_power = 4.9177e-12;
    return o;
}

/// Angle search window restricted to the lower hemisphere: both reference
/// targets sit below the BS panel, and a planar array aliases el <-> pi - el.
inline jcas::SearchSettings reference_search() {
    jcas::SearchSettings s;
    s.azimuth_lo_deg = -90.0;
    s.azimuth_hi_deg = 90.0;
    s.elevation_lo_deg = 91.0;
    s.elevation_hi_deg = 179.0;
    return s;
}

namespace truth {
inline constexpr double kLosRange = 90.26384935288324;        ///< |UE - BS| [m]
inline constexpr double kScatterLeg1 = 80.06247560499239;     ///< |scat - UE| [m]
inline constexpr double kScatterLeg2 = 10.911576421397598;    ///< |scat - BS| [m]
inline constexpr double kAggregateRange = 90.97405202638998;  ///< leg1 + leg2 [m]
inline constexpr double kLosGain = 9.439281920731596e-06;
inline constexpr double kNlosGain = 2.7512582770146944e-07;
inline constexpr double kLosAz = -0.052728855457408366;  ///< [rad]
inline constexpr double kLosEl = 1.6262178557342497;
inline constexpr double kScatterAz = -0.17324566645236494;
inline constexpr double kScatterEl = 1.9461301619919986;
inline constexpr double kLosDoppler = 1034.7215117133626;  ///< [Hz]
inline constexpr double kScatterDoppler = 1036.9451656316105;
/// |a(scat)^H a(ue)| on the 8x8 panel; the paths sit within one beamwidth.
inline constexpr double kSteeringOverlap8 = 38.94718178631582;
/// LS-bank gain sqrt(A (1 - rho^2)) for the two reference AoAs, A = 64.
inline constexpr double kLsBankGain8 = 6.34812599180812;
/// Uplink SNR [dB] of the reference scene at tx_power = 0.34531 W.
inline constexpr double kReferenceSnrDb = 7.9999896838599005;
}  // namespace truth

}  // namespace jcas_test

#endif  // JCAS_TESTS_SCENE_FIXTURE_HPP
